#include "vscsync/equilibrium.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "vscsync/errors.hpp"

namespace vscsync {

ImpedanceSet build_impedances(const SystemParams& p, double omega)
{
    ImpedanceSet z;
    z.Zg = p.L_g * omega * kJ - p.r_g * Mat2::Identity();
    z.Z = p.L * omega * kJ - p.r * Mat2::Identity();
    z.Yc = p.C * omega * kJ;
    z.Q << z.Zg, Mat2::Identity(), Mat2::Identity(), -z.Yc;

    const double scale = std::max(1.0, z.Q.cwiseAbs().maxCoeff());
    if (std::abs(z.Q.determinant()) < 1e-12 * std::pow(scale, 2)) {
        throw SingularMatrixError("impedance block matrix Q is singular");
    }
    return z;
}

EquilibriumPoint assignable_equilibrium(double delta, const Vec2& i_ref, const SystemParams& p,
                                        double omega)
{
    const ImpedanceSet z = build_impedances(p, omega);
    Eigen::Vector4d rhs;
    rhs << p.V_g * std::cos(delta), p.V_g * std::sin(delta), i_ref;
    const Eigen::Vector4d y14 = z.Q.partialPivLu().solve(rhs);

    EquilibriumPoint eq;
    eq.state.i_g = y14.head<2>();
    eq.state.v = y14.tail<2>();
    eq.state.i = i_ref;
    eq.state.delta = delta;
    eq.input.u1 = omega;
    eq.input.u_dq = eq.state.v - z.Z * i_ref;
    return eq;
}

double pcc_power(const PlantState& s, const PowerFlowOptions& opt)
{
    return opt.power_scale * s.v.dot(s.i_g);
}

ReferenceSolution solve_references(const ReferenceRequest& req, const SystemParams& p, double omega,
                                   const PowerFlowOptions& opt)
{
    if (!(req.V_ref > 0.0)) {
        throw ConfigError("V_ref must be > 0");
    }
    const ImpedanceSet z = build_impedances(p, omega);
    const Mat2 zg_inv = z.Zg.inverse();
    const Vec2 v(req.V_ref, 0.0);
    const Vec2 row = opt.power_scale * (zg_inv.transpose() * v);  // dP/d(v_g,dq)

    auto residual = [&](double d) {
        return row.dot(p.V_g * Vec2(std::cos(d), std::sin(d)) - v) - req.P_ref;
    };
    auto slope = [&](double d) { return row.dot(p.V_g * Vec2(-std::sin(d), std::cos(d))); };

    // Coarse scan: brackets every sign change and keeps the one closest to 0.
    std::optional<std::pair<double, double>> bracket;
    double best_mid = std::numeric_limits<double>::infinity();
    const int n = std::max(opt.grid_points, 3);
    double d_prev = opt.delta_min;
    double g_prev = residual(d_prev);
    for (int k = 1; k < n; ++k) {
        const double d = opt.delta_min + (opt.delta_max - opt.delta_min) * k / (n - 1);
        const double g = residual(d);
        if ((g_prev <= 0.0 && g >= 0.0) || (g_prev >= 0.0 && g <= 0.0)) {
            const double mid = 0.5 * (d_prev + d);
            if (std::abs(mid) < std::abs(best_mid)) {
                best_mid = mid;
                bracket = {d_prev, d};
            }
        }
        d_prev = d;
        g_prev = g;
    }
    if (!bracket) {
        std::ostringstream msg;
        msg << "P_ref = " << req.P_ref << " W at V_ref = " << req.V_ref
            << " V exceeds the transfer capability for angles in [" << opt.delta_min << ", "
            << opt.delta_max << "]";
        throw InfeasibleRequest(msg.str());
    }

    // Safeguarded Newton: falls back to bisection when the step leaves the bracket.
    auto [lo, hi] = *bracket;
    double g_lo = residual(lo);
    const double tol = 1e-12 * std::max({std::abs(req.P_ref), row.norm() * p.V_g, 1.0});
    double d = 0.5 * (lo + hi);
    ReferenceSolution sol;
    bool converged = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
        sol.iterations = it + 1;
        const double g = residual(d);
        if (std::abs(g) <= tol || hi - lo < 1e-15) {
            converged = true;
            break;
        }
        if ((g < 0.0) == (g_lo < 0.0)) {
            lo = d;
            g_lo = g;
        } else {
            hi = d;
        }
        const double s = slope(d);
        double next = (s != 0.0) ? d - g / s : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        d = next;
    }
    if (!converged) {
        throw NonConvergence("power-flow Newton did not converge");
    }

    const Vec2 i_g = zg_inv * (p.V_g * Vec2(std::cos(d), std::sin(d)) - v);
    sol.phi_ref = d;
    sol.i_ref = i_g - z.Yc * v;
    sol.equilibrium = assignable_equilibrium(d, sol.i_ref, p, omega);
    sol.phi_pcc = std::atan2(sol.equilibrium.state.v.y(), sol.equilibrium.state.v.x());
    return sol;
}

}  // namespace vscsync
