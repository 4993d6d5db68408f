#pragma once

#include <optional>

#include "vscsync/signals.hpp"

namespace vscsync {

/// Physical constants of the grid-connected converter (plant truth).
struct SystemParams {
    double r_g = 10.24;       // ohm
    double L_g = 0.33;        // H
    double C = 5.29e-6;       // F
    double r = 1.02;          // ohm
    double L = 0.065;         // H
    double V_g = 261e3;       // V, dq magnitude of the grid source
    double omega = 100 * kPi; // rad/s
    double V_dc = 640e3;      // V
    std::optional<double> m_min;
    std::optional<double> m_max;

    /// Throws ConfigError when any invariant is violated.
    void validate() const;
};

/// dq electrical states plus the angle error. delta is plant truth: only the
/// metrics layer may read it.
struct PlantState {
    Vec2 i_g = Vec2::Zero();
    Vec2 v = Vec2::Zero();
    Vec2 i = Vec2::Zero();
    double delta = 0.0;
};

/// The measurable part of PlantState, y = col(i_g, v, i).
struct MeasuredOutput {
    Vec2 i_g = Vec2::Zero();
    Vec2 v = Vec2::Zero();
    Vec2 i = Vec2::Zero();

    static MeasuredOutput from(const PlantState& s) { return {s.i_g, s.v, s.i}; }
};

struct PlantInput {
    double u1 = 0.0;         // frame speed, rad/s
    Vec2 u_dq = Vec2::Zero();  // converter voltage, V
};

struct AbcPlantState {
    ThreePhase i_g;
    ThreePhase v;
    ThreePhase i;
};

PlantState plant_deriv_dq(const PlantState& s, const PlantInput& u, const SystemParams& p);

AbcPlantState plant_deriv_abc(const AbcPlantState& s, double t, const ThreePhase& m,
                              const SystemParams& p);

struct Modulation {
    DqVec m;
    bool saturated = false;
};

/// u_dq / V_dc. The abc indices are sinusoids of amplitude sqrt(2/3)|m_dq|;
/// the flag is raised when that swing leaves [m_min, m_max]. Never clamps.
Modulation modulation_indices(const DqVec& u_dq, const SystemParams& p);

/// 1/2 (L_g |i_g|^2 + C |v|^2 + L |i|^2).
double stored_energy(const PlantState& s, const SystemParams& p);

}  // namespace vscsync
