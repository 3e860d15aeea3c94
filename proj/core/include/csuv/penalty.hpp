#pragma once

#include <string>
#include <string_view>

namespace csuv {

enum class PenaltyFamily { lasso, elastic_net, mcp, scad };

/// A penalized least squares family together with its shape parameters.
/// `alpha` is the elastic-net l1 share and is ignored otherwise;
/// `concavity` is gamma for MCP (> 1) and SCAD (> 2).
struct PenaltySpec {
    PenaltyFamily family = PenaltyFamily::lasso;
    double alpha = 1.0;
    double concavity = 0.0;

    static PenaltySpec lasso() { return {PenaltyFamily::lasso, 1.0, 0.0}; }
    static PenaltySpec elastic_net(double alpha = 0.5) { return {PenaltyFamily::elastic_net, alpha, 0.0}; }
    static PenaltySpec mcp(double gamma = 3.0) { return {PenaltyFamily::mcp, 1.0, gamma}; }
    static PenaltySpec scad(double gamma = 3.7) { return {PenaltyFamily::scad, 1.0, gamma}; }

    /// Throws InvalidInput when the shape parameters are out of range.
    void validate() const;

    /// Short identifier: "lasso", "enet", "mcp" or "scad".
    std::string name() const;

    /// Parses a short identifier into the family with its default shape.
    static PenaltySpec parse(std::string_view name);

    bool operator==(const PenaltySpec&) const = default;
};

/// sign(z) * max(|z| - lambda, 0).
double soft_threshold(double z, double lambda);

/// Minimizer of 0.5 * (b - z)^2 + P(b) for a unit-scale coordinate. This is
/// the exact coordinate update for a standardized column.
double threshold(const PenaltySpec& penalty, double z, double lambda);

/// Penalty value P(b; lambda) in the objective
///   (1 / 2n) ||y - X b||^2 + sum_j P(b_j; lambda).
double penalty_value(const PenaltySpec& penalty, double b, double lambda);

/// Derivative of P at b != 0 (signed).
double penalty_derivative(const PenaltySpec& penalty, double b, double lambda);

/// Half-width of the subdifferential of P at 0 (the l1 weight at the origin).
double penalty_slope_at_zero(const PenaltySpec& penalty, double lambda);

}  // namespace csuv
