#include "csuv/metrics.hpp"

#include <algorithm>
#include <iterator>

#include "csuv/error.hpp"

namespace csuv {

namespace {

std::vector<int> as_set(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

int intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return static_cast<int>(common.size());
}

}  // namespace

SelectionScore selection_score(const std::vector<int>& selected, const std::vector<int>& truth) {
    const auto s = as_set(selected);
    const auto t = as_set(truth);
    SelectionScore out;
    out.tp = intersection_size(s, t);
    out.fp = static_cast<int>(s.size()) - out.tp;
    out.fn = static_cast<int>(t.size()) - out.tp;
    const int denom = 2 * out.tp + out.fn + out.fp;
    out.f_measure = denom == 0 ? 1.0 : 2.0 * out.tp / denom;
    return out;
}

EstimationScore estimation_score(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
    if (estimate.size() != truth.size()) throw InvalidInput("coefficient vectors differ in length");
    const Eigen::VectorXd d = estimate - truth;
    return {d.lpNorm<1>(), d.norm(), 0.0};
}

int hamming(const std::vector<int>& a, const std::vector<int>& b) {
    const auto x = as_set(a);
    const auto y = as_set(b);
    return static_cast<int>(x.size() + y.size()) - 2 * intersection_size(x, y);
}

double jaccard(const std::vector<int>& a, const std::vector<int>& b) {
    const auto x = as_set(a);
    const auto y = as_set(b);
    const int common = intersection_size(x, y);
    const int uni = static_cast<int>(x.size() + y.size()) - common;
    if (uni == 0) return 0.0;
    return static_cast<double>(uni - common) / uni;
}

Eigen::MatrixXd disagreement_matrix(const std::vector<std::vector<std::vector<int>>>& selections) {
    if (selections.empty()) throw InvalidInput("disagreement matrix needs at least one repetition");
    const auto methods = static_cast<Eigen::Index>(selections.front().size());
    if (methods < 2) throw InvalidInput("disagreement matrix needs at least two methods");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(methods, methods);
    for (const auto& rep : selections) {
        if (static_cast<Eigen::Index>(rep.size()) != methods) throw InvalidInput("ragged selection table");
        for (Eigen::Index a = 0; a < methods; ++a)
            for (Eigen::Index b = a + 1; b < methods; ++b) {
                const double d = jaccard(rep[static_cast<std::size_t>(a)], rep[static_cast<std::size_t>(b)]);
                out(a, b) += d;
                out(b, a) += d;
            }
    }
    return out / static_cast<double>(selections.size());
}

}  // namespace csuv
