#pragma once

#include "vscsync/plant.hpp"
#include "vscsync/signals.hpp"

namespace vscsync {

/// Steady-state impedances seen in the rotating frame at speed omega.
struct ImpedanceSet {
    Mat2 Zg;  // L_g w J - r_g I
    Mat2 Z;   // L w J - r I
    Mat2 Yc;  // C w J
    /// [[Zg, I], [I, -Yc]]: maps col(i_g, v) to col(v_g,dq, i) at equilibrium.
    Mat4 Q;
};

/// Throws SingularMatrixError when Q is numerically singular.
ImpedanceSet build_impedances(const SystemParams& p, double omega);

struct EquilibriumPoint {
    PlantState state;  // includes delta
    PlantInput input;  // (omega, v - Z i)
};

/// Equilibrium with grid angle `delta` and converter current `i_ref`.
EquilibriumPoint assignable_equilibrium(double delta, const Vec2& i_ref, const SystemParams& p,
                                        double omega);

struct ReferenceRequest {
    double P_ref = 0.0;  // W
    double V_ref = 0.0;  // V, dq magnitude of the PCC voltage
};

struct PowerFlowOptions {
    /// Active power is power_scale * v^T i_g. 1.5 reproduces the operator's
    /// angle anchors (see README, "Power-flow convention").
    double power_scale = 1.5;
    double delta_min = -kPi / 2;
    double delta_max = kPi / 2;
    int grid_points = 721;
    int max_iterations = 100;
};

struct ReferenceSolution {
    double phi_ref = 0.0;  // grid angle in the converter frame, rad
    Vec2 i_ref = Vec2::Zero();
    double phi_pcc = 0.0;  // PCC voltage angle at the target (0 by construction)
    EquilibriumPoint equilibrium;
    int iterations = 0;
};

/// PCC active power under the configured convention.
double pcc_power(const PlantState& s, const PowerFlowOptions& opt = {});

/// Finds the lower-|delta| equilibrium with |v| = V_ref on the d-axis and
/// pcc_power = P_ref. Throws InfeasibleRequest or NonConvergence.
ReferenceSolution solve_references(const ReferenceRequest& req, const SystemParams& p, double omega,
                                   const PowerFlowOptions& opt = {});

}  // namespace vscsync
