#include <algorithm>
#include <cmath>
#include <limits>

#include "csuv/error.hpp"
#include "csuv/solvers.hpp"

namespace csuv {

namespace {

Eigen::VectorXd centered_response(const StandardizedDesign& design) {
    return design.y.array() - design.y_mean();
}

double max_abs_correlation(const StandardizedDesign& design, const Eigen::VectorXd& yc) {
    const double n = static_cast<double>(design.rows());
    double best = 0.0;
    for (Index j = 0; j < design.cols(); ++j) {
        if (design.column_scales(j) == 0.0) continue;
        best = std::max(best, std::abs(design.X.col(j).dot(yc) / n));
    }
    return best;
}

// Which smooth piece of the penalty a nonzero coefficient lies on.
int penalty_piece(const PenaltySpec& penalty, double b, double lambda) {
    const double ab = std::abs(b);
    switch (penalty.family) {
        case PenaltyFamily::lasso:
        case PenaltyFamily::elastic_net: return 0;
        case PenaltyFamily::mcp: return ab <= penalty.concavity * lambda ? 0 : 1;
        case PenaltyFamily::scad:
            if (ab <= lambda) return 0;
            return ab <= penalty.concavity * lambda ? 1 : 2;
    }
    return 0;
}

// Penalty derivative on a piece as offset + slope * b.
std::pair<double, double> piece_derivative(const PenaltySpec& penalty, int piece, double sign, double lambda) {
    const double g = penalty.concavity;
    switch (penalty.family) {
        case PenaltyFamily::lasso: return {sign * lambda, 0.0};
        case PenaltyFamily::elastic_net: return {sign * lambda * penalty.alpha, lambda * (1.0 - penalty.alpha)};
        case PenaltyFamily::mcp: return piece == 0 ? std::pair{sign * lambda, -1.0 / g} : std::pair{0.0, 0.0};
        case PenaltyFamily::scad:
            if (piece == 0) return {sign * lambda, 0.0};
            if (piece == 1) return {sign * g * lambda / (g - 1.0), -1.0 / (g - 1.0)};
            return {0.0, 0.0};
    }
    return {0.0, 0.0};
}

// Values a coefficient on the given sign and piece may not cross: zero and
// the piece boundaries on its side.
std::vector<double> piece_edges(const PenaltySpec& penalty, int piece, double b, double lambda) {
    const double sign = b > 0.0 ? 1.0 : -1.0;
    const double g = penalty.concavity;
    std::vector<double> edges{0.0};
    switch (penalty.family) {
        case PenaltyFamily::lasso:
        case PenaltyFamily::elastic_net: break;
        case PenaltyFamily::mcp: edges.push_back(sign * g * lambda); break;
        case PenaltyFamily::scad:
            if (piece == 0) edges.push_back(sign * lambda);
            else if (piece == 1) edges.insert(edges.end(), {sign * lambda, sign * g * lambda});
            else edges.push_back(sign * g * lambda);
            break;
    }
    return edges;
}

// Cyclic coordinate descent on one lambda, updating beta and the residual in place.
class CoordinateDescent {
public:
    CoordinateDescent(const StandardizedDesign& design, const PenaltySpec& penalty, const FitOptions& options)
        : X_(design.X), usable_(design.column_scales.array() != 0.0), penalty_(penalty), options_(options),
          inv_n_(1.0 / static_cast<double>(design.rows())) {}

    // Returns the number of sweeps used.
    int solve(double lambda, Eigen::VectorXd& beta, Eigen::VectorXd& residual, std::size_t lambda_index) const {
        int sweeps = 0;
        std::vector<int> active;
        for (;;) {
            double change = full_sweep(lambda, beta, residual);
            ++sweeps;
            if (change <= options_.tolerance) return sweeps;
            if (sweeps >= options_.max_sweeps) throw ConvergenceError(lambda_index, change);

            active.clear();
            for (Index j = 0; j < beta.size(); ++j)
                if (beta(j) != 0.0) active.push_back(static_cast<int>(j));
            double previous = 0.0;
            int next_polish = kFirstPolish, backoff = kFirstPolish;
            for (int inner = 1;; ++inner) {
                change = 0.0;
                for (int j : active) change = std::max(change, update(j, lambda, beta, residual));
                ++sweeps;
                if (change <= options_.tolerance) break;
                if (sweeps >= options_.max_sweeps) throw ConvergenceError(lambda_index, change);
                if (inner >= next_polish && previous > 0.0) {
                    // Linear convergence at this rate would need `remaining` more sweeps.
                    const double rate = change / previous;
                    const double remaining =
                        rate < 1.0 ? std::log(options_.tolerance / change) / std::log(rate) : kSlowSweeps;
                    if (remaining >= kSlowSweeps) {
                        polish(lambda, active, beta, residual);
                        backoff *= 2;
                        next_polish = inner + backoff;
                    }
                }
                previous = change;
            }
        }
    }

private:
    double full_sweep(double lambda, Eigen::VectorXd& beta, Eigen::VectorXd& residual) const {
        double change = 0.0;
        for (Index j = 0; j < beta.size(); ++j) {
            if (!usable_(j)) continue;
            change = std::max(change, update(static_cast<int>(j), lambda, beta, residual));
        }
        return change;
    }

    double update(int j, double lambda, Eigen::VectorXd& beta, Eigen::VectorXd& residual) const {
        const auto col = X_.col(j);
        const double z = col.dot(residual) * inv_n_ + beta(j);
        const double updated = threshold(penalty_, z, lambda);
        const double delta = updated - beta(j);
        if (delta == 0.0) return 0.0;
        residual.noalias() -= delta * col;
        beta(j) = updated;
        return std::abs(delta);
    }

    // Slow coordinate descent on an ill-conditioned active set: with signs
    // and penalty pieces held fixed the stationarity conditions are linear.
    // Step toward that solution as far as the first sign or piece change
    // (a coefficient reaching zero leaves the active set) and keep the step
    // only if the objective goes down.
    void polish(double lambda, const std::vector<int>& candidates, Eigen::VectorXd& beta,
                Eigen::VectorXd& residual) const {
        std::vector<int> active;
        for (int j : candidates)
            if (beta(j) != 0.0) active.push_back(j);
        const auto k = static_cast<Index>(active.size());
        if (k == 0) return;
        Eigen::MatrixXd XA(X_.rows(), k);
        Eigen::VectorXd current(k);
        Eigen::VectorXd fitted = residual;
        for (Index a = 0; a < k; ++a) {
            XA.col(a) = X_.col(active[static_cast<std::size_t>(a)]);
            current(a) = beta(active[static_cast<std::size_t>(a)]);
            fitted += current(a) * XA.col(a);
        }
        Eigen::MatrixXd G = XA.transpose() * XA * inv_n_;
        Eigen::VectorXd rhs = XA.transpose() * fitted * inv_n_;
        std::vector<int> piece(static_cast<std::size_t>(k));
        for (Index a = 0; a < k; ++a) {
            piece[static_cast<std::size_t>(a)] = penalty_piece(penalty_, current(a), lambda);
            const auto [offset, slope] =
                piece_derivative(penalty_, piece[static_cast<std::size_t>(a)], current(a) > 0.0 ? 1.0 : -1.0, lambda);
            rhs(a) -= offset;
            G(a, a) += slope;
        }
        // A singular Gram matrix (more active columns than the rows support)
        // leaves a direction that keeps the fit unchanged; follow it until a
        // coefficient reaches zero, in the sense that does not raise the penalty.
        Eigen::VectorXd direction;
        double step = 1.0;
        bool exact = true;
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
        if (qr.rank() == k) {
            direction = qr.solve(rhs) - current;
        } else {
            const Eigen::BDCSVD<Eigen::MatrixXd> svd(XA, Eigen::ComputeFullV);
            const Eigen::VectorXd& sv = svd.singularValues();
            Index rank = 0;
            while (rank < sv.size() && sv(rank) > 1e-9 * sv(0)) ++rank;
            if (rank == k) return;
            const Eigen::MatrixXd N = svd.matrixV().rightCols(k - rank);
            Eigen::VectorXd grad(k);
            for (Index a = 0; a < k; ++a) grad(a) = penalty_derivative(penalty_, current(a), lambda);
            direction = -(N * (N.transpose() * grad));
            if (direction.norm() <= 1e-12 * grad.norm()) direction = N.col(0);
            step = std::numeric_limits<double>::infinity();
            exact = false;
        }
        if (!direction.allFinite()) return;

        // Largest step keeping every coefficient on its sign and piece.
        Index blocking = -1;
        for (Index a = 0; a < k; ++a) {
            for (double edge : piece_edges(penalty_, piece[static_cast<std::size_t>(a)], current(a), lambda)) {
                const double d = direction(a);
                if (d == 0.0) continue;
                const double t = (edge - current(a)) / d;
                if (t > 0.0 && t < step) {
                    step = t;
                    blocking = a;
                }
            }
        }
        if (!std::isfinite(step)) return;
        Eigen::VectorXd next = current + step * direction;
        if (blocking >= 0 && std::abs(next(blocking)) < 1e-12 * std::max(1.0, std::abs(current(blocking))))
            next(blocking) = 0.0;

        const Eigen::VectorXd next_residual = fitted - XA * next;
        auto value = [&](const Eigen::VectorXd& r, const Eigen::VectorXd& b) {
            double v = 0.5 * r.squaredNorm() * inv_n_;
            for (Index a = 0; a < k; ++a) v += penalty_value(penalty_, b(a), lambda);
            return v;
        };
        const double before = value(residual, current);
        const double after = value(next_residual, next);
        if (exact ? !(after < before) : !(after <= before + 1e-14 * std::abs(before))) return;
        residual = next_residual;
        for (Index a = 0; a < k; ++a) beta(active[static_cast<std::size_t>(a)]) = next(a);
    }

    static constexpr int kFirstPolish = 15;
    static constexpr double kSlowSweeps = 20.0;

    const Eigen::MatrixXd& X_;
    Eigen::Array<bool, Eigen::Dynamic, 1> usable_;
    PenaltySpec penalty_;
    FitOptions options_;
    double inv_n_;
};

PathPoint make_point(double lambda, const Eigen::VectorXd& beta, double intercept, int sweeps) {
    PathPoint pt;
    pt.lambda = lambda;
    pt.beta = beta;
    pt.intercept = intercept;
    pt.support = support_of(beta);
    pt.sweeps = sweeps;
    return pt;
}

}  // namespace

double lambda_max(const StandardizedDesign& design, const PenaltySpec& penalty) {
    penalty.validate();
    const double base = max_abs_correlation(design, centered_response(design));
    return penalty.family == PenaltyFamily::elastic_net ? base / penalty.alpha : base;
}

LambdaPath make_lambda_path(double hi, double min_ratio, std::size_t length) {
    if (!(hi > 0.0) || !std::isfinite(hi)) throw InvalidInput("lambda path needs a positive finite upper end");
    if (!(min_ratio > 0.0 && min_ratio < 1.0)) throw InvalidInput("lambda min_ratio must lie in (0, 1)");
    if (length == 0) throw InvalidInput("lambda path length must be positive");
    LambdaPath path;
    path.min_ratio = min_ratio;
    path.values.resize(length);
    if (length == 1) {
        path.values[0] = hi;
        return path;
    }
    const double log_hi = std::log(hi);
    const double step = std::log(min_ratio) / static_cast<double>(length - 1);
    path.values[0] = hi;
    for (std::size_t k = 1; k + 1 < length; ++k) path.values[k] = std::exp(log_hi + step * static_cast<double>(k));
    path.values[length - 1] = hi * min_ratio;
    return path;
}

LambdaPath make_lambda_path(const StandardizedDesign& design, const PenaltySpec& penalty, std::size_t length,
                            double min_ratio) {
    const double hi = lambda_max(design, penalty);
    if (!(hi > 0.0)) throw InvalidInput("response is uncorrelated with every column (lambda_max = 0)");
    return make_lambda_path(hi, min_ratio, length);
}

PathFit fit_path(const StandardizedDesign& design, const PenaltySpec& penalty, const LambdaPath& path,
                 const FitOptions& options) {
    penalty.validate();
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (!(path.values[k] > 0.0)) throw InvalidInput("lambda values must be positive");
        if (k > 0 && !(path.values[k] < path.values[k - 1]))
            throw InvalidInput("lambda values must be strictly decreasing");
    }

    const Eigen::VectorXd yc = centered_response(design);
    const double lmax = lambda_max(design, penalty);
    const double total_ss = yc.squaredNorm();
    const double intercept = design.y_mean();
    const Index n = design.rows();

    CoordinateDescent cd(design, penalty, options);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(design.cols());
    Eigen::VectorXd residual = yc;

    PathFit fit;
    fit.penalty = penalty;
    fit.points.reserve(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) {
        const double lambda = path.values[k];
        int sweeps = 0;
        if (lambda >= lmax && beta.isZero(0.0)) {
            // Closed form: every coordinate is thresholded to zero.
        } else {
            try {
                sweeps = cd.solve(lambda, beta, residual, k);
            } catch (const ConvergenceError&) {
                if (!options.truncate_on_failure || fit.points.empty()) throw;
                break;
            }
        }
        fit.points.push_back(make_point(lambda, beta, intercept, sweeps));

        if (options.stop_when_saturated) {
            const auto nnz = static_cast<Index>(fit.points.back().support.size());
            const double r2 = total_ss > 0.0 ? 1.0 - residual.squaredNorm() / total_ss : 1.0;
            if (nnz >= n - 1 || r2 >= 0.999) break;
        }
    }
    return fit;
}

PathPoint fit_single(const StandardizedDesign& design, const PenaltySpec& penalty, double lambda,
                     const Eigen::VectorXd& start, const FitOptions& options) {
    penalty.validate();
    if (!(lambda > 0.0)) throw InvalidInput("lambda must be positive");
    Eigen::VectorXd beta = start.size() == 0 ? Eigen::VectorXd::Zero(design.cols()) : start;
    if (beta.size() != design.cols()) throw InvalidInput("start vector has the wrong length");
    Eigen::VectorXd residual = centered_response(design) - design.X * beta;
    int sweeps = 0;
    if (!(lambda >= lambda_max(design, penalty) && beta.isZero(0.0)))
        sweeps = CoordinateDescent(design, penalty, options).solve(lambda, beta, residual, 0);
    return make_point(lambda, beta, design.y_mean(), sweeps);
}

double objective(const StandardizedDesign& design, const PenaltySpec& penalty, double lambda,
                 const Eigen::VectorXd& beta) {
    const Eigen::VectorXd r = centered_response(design) - design.X * beta;
    double value = 0.5 * r.squaredNorm() / static_cast<double>(design.rows());
    for (Index j = 0; j < beta.size(); ++j) value += penalty_value(penalty, beta(j), lambda);
    return value;
}

double kkt_residual(const StandardizedDesign& design, const PenaltySpec& penalty, double lambda,
                    const Eigen::VectorXd& beta) {
    const Eigen::VectorXd r = centered_response(design) - design.X * beta;
    const Eigen::VectorXd grad = design.X.transpose() * r / static_cast<double>(design.rows());
    const double slope0 = penalty_slope_at_zero(penalty, lambda);
    double worst = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        if (design.column_scales(j) == 0.0) continue;
        const double violation = beta(j) == 0.0 ? std::max(0.0, std::abs(grad(j)) - slope0)
                                                : std::abs(grad(j) - penalty_derivative(penalty, beta(j), lambda));
        worst = std::max(worst, violation);
    }
    return worst;
}

}  // namespace csuv
