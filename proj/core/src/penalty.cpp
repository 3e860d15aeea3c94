#include "csuv/penalty.hpp"

#include <cmath>

#include "csuv/error.hpp"

namespace csuv {

void PenaltySpec::validate() const {
    switch (family) {
        case PenaltyFamily::lasso:
            return;
        case PenaltyFamily::elastic_net:
            if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInput("elastic net alpha must lie in (0, 1]");
            return;
        case PenaltyFamily::mcp:
            if (!(concavity > 1.0)) throw InvalidInput("MCP concavity must exceed 1");
            return;
        case PenaltyFamily::scad:
            if (!(concavity > 2.0)) throw InvalidInput("SCAD concavity must exceed 2");
            return;
    }
}

std::string PenaltySpec::name() const {
    switch (family) {
        case PenaltyFamily::lasso: return "lasso";
        case PenaltyFamily::elastic_net: return "enet";
        case PenaltyFamily::mcp: return "mcp";
        case PenaltyFamily::scad: return "scad";
    }
    return "unknown";
}

PenaltySpec PenaltySpec::parse(std::string_view name) {
    if (name == "lasso") return lasso();
    if (name == "enet" || name == "elastic_net" || name == "elasticnet") return elastic_net();
    if (name == "mcp") return mcp();
    if (name == "scad") return scad();
    throw InvalidInput("unknown method '" + std::string(name) + "' (expected lasso, enet, mcp or scad)");
}

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

double threshold(const PenaltySpec& penalty, double z, double lambda) {
    const double az = std::abs(z);
    switch (penalty.family) {
        case PenaltyFamily::lasso:
            return soft_threshold(z, lambda);
        case PenaltyFamily::elastic_net:
            return soft_threshold(z, lambda * penalty.alpha) / (1.0 + lambda * (1.0 - penalty.alpha));
        case PenaltyFamily::mcp: {
            const double g = penalty.concavity;
            // Firm thresholding.
            if (az <= g * lambda) return soft_threshold(z, lambda) / (1.0 - 1.0 / g);
            return z;
        }
        case PenaltyFamily::scad: {
            const double g = penalty.concavity;
            if (az <= 2.0 * lambda) return soft_threshold(z, lambda);
            if (az <= g * lambda) return soft_threshold(z, g * lambda / (g - 1.0)) / (1.0 - 1.0 / (g - 1.0));
            return z;
        }
    }
    return 0.0;
}

double penalty_value(const PenaltySpec& penalty, double b, double lambda) {
    const double ab = std::abs(b);
    switch (penalty.family) {
        case PenaltyFamily::lasso:
            return lambda * ab;
        case PenaltyFamily::elastic_net:
            return lambda * (penalty.alpha * ab + 0.5 * (1.0 - penalty.alpha) * b * b);
        case PenaltyFamily::mcp: {
            const double g = penalty.concavity;
            if (ab <= g * lambda) return lambda * ab - b * b / (2.0 * g);
            return 0.5 * g * lambda * lambda;
        }
        case PenaltyFamily::scad: {
            const double g = penalty.concavity;
            if (ab <= lambda) return lambda * ab;
            if (ab <= g * lambda) return (2.0 * g * lambda * ab - b * b - lambda * lambda) / (2.0 * (g - 1.0));
            return 0.5 * lambda * lambda * (g + 1.0);
        }
    }
    return 0.0;
}

double penalty_derivative(const PenaltySpec& penalty, double b, double lambda) {
    const double ab = std::abs(b);
    const double sgn = b > 0 ? 1.0 : (b < 0 ? -1.0 : 0.0);
    switch (penalty.family) {
        case PenaltyFamily::lasso:
            return sgn * lambda;
        case PenaltyFamily::elastic_net:
            return lambda * (penalty.alpha * sgn + (1.0 - penalty.alpha) * b);
        case PenaltyFamily::mcp: {
            const double g = penalty.concavity;
            if (ab <= g * lambda) return sgn * lambda - b / g;
            return 0.0;
        }
        case PenaltyFamily::scad: {
            const double g = penalty.concavity;
            if (ab <= lambda) return sgn * lambda;
            if (ab <= g * lambda) return (sgn * g * lambda - b) / (g - 1.0);
            return 0.0;
        }
    }
    return 0.0;
}

double penalty_slope_at_zero(const PenaltySpec& penalty, double lambda) {
    return penalty.family == PenaltyFamily::elastic_net ? lambda * penalty.alpha : lambda;
}

}  // namespace csuv
