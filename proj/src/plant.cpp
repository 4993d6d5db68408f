#include "vscsync/plant.hpp"

#include <cmath>
#include <string>

#include "vscsync/errors.hpp"

namespace vscsync {

void SystemParams::validate() const
{
    auto positive = [](double value, const char* name) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw ConfigError(std::string("parameter ") + name + " must be finite and > 0");
        }
    };
    positive(r_g, "r_g");
    positive(L_g, "L_g");
    positive(C, "C");
    positive(r, "r");
    positive(L, "L");
    positive(V_g, "V_g");
    positive(omega, "omega");
    positive(V_dc, "V_dc");
    if (m_min && m_max && !(*m_min < *m_max)) {
        throw ConfigError("modulation bounds require m_min < m_max");
    }
}

PlantState plant_deriv_dq(const PlantState& s, const PlantInput& u, const SystemParams& p)
{
    const Vec2 grid = p.V_g * Vec2(std::cos(s.delta), std::sin(s.delta));
    PlantState d;
    d.i_g = (-p.r_g * s.i_g + s.v + p.L_g * u.u1 * (kJ * s.i_g) - grid) / p.L_g;
    d.v = (-s.i_g + s.i + p.C * u.u1 * (kJ * s.v)) / p.C;
    d.i = (-s.v - p.r * s.i + p.L * u.u1 * (kJ * s.i) + u.u_dq) / p.L;
    d.delta = u.u1 - p.omega;
    return d;
}

AbcPlantState plant_deriv_abc(const AbcPlantState& s, double t, const ThreePhase& m,
                              const SystemParams& p)
{
    const ThreePhase vg = balanced_source(p.V_g, p.omega, t);
    AbcPlantState d;
    d.i = {(-p.r * s.i.a + p.V_dc * m.a - s.v.a) / p.L,
           (-p.r * s.i.b + p.V_dc * m.b - s.v.b) / p.L,
           (-p.r * s.i.c + p.V_dc * m.c - s.v.c) / p.L};
    d.i_g = {(-p.r_g * s.i_g.a + s.v.a - vg.a) / p.L_g,
             (-p.r_g * s.i_g.b + s.v.b - vg.b) / p.L_g,
             (-p.r_g * s.i_g.c + s.v.c - vg.c) / p.L_g};
    d.v = {(-s.i_g.a + s.i.a) / p.C, (-s.i_g.b + s.i.b) / p.C, (-s.i_g.c + s.i.c) / p.C};
    return d;
}

Modulation modulation_indices(const DqVec& u_dq, const SystemParams& p)
{
    Modulation out;
    out.m = {u_dq.d / p.V_dc, u_dq.q / p.V_dc};
    const double swing = std::sqrt(2.0 / 3.0) * std::hypot(out.m.d, out.m.q);
    if (p.m_min && -swing < *p.m_min) {
        out.saturated = true;
    }
    if (p.m_max && swing > *p.m_max) {
        out.saturated = true;
    }
    return out;
}

double stored_energy(const PlantState& s, const SystemParams& p)
{
    return 0.5 * (p.L_g * s.i_g.squaredNorm() + p.C * s.v.squaredNorm() + p.L * s.i.squaredNorm());
}

}  // namespace vscsync
