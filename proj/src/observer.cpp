#include "vscsync/observer.hpp"

#include <cmath>

namespace vscsync {

ObserverState ObserverState::initial(const MeasuredOutput& y0, const Vec2& z12, const Vec2& z34)
{
    ObserverState o;
    o.z12 = z12;
    o.z34 = z34;
    o.fy = y0.i_g;
    return o;
}

Vec2 q_signal(const MeasuredOutput& y, double u1, const ObserverModel& m)
{
    return -(m.r_g / m.L_g) * y.i_g + y.v / m.L_g + u1 * (kJ * y.i_g);
}

ObserverState observer_deriv(const ObserverState& o, const MeasuredOutput& y, double u1,
                             const ObserverModel& m)
{
    const Vec2 q = q_signal(y, u1, m);
    ObserverState d;
    d.z12 = u1 * (kJ * o.z12) + kJ * q;
    d.z34 = u1 * (kJ * (o.z34 - kJ * y.i_g));
    d.phi = u1 * (kJ * o.phi);
    d.fy = m.lambda * (y.i_g - o.fy);
    d.fq = m.lambda * (q - o.fq);
    d.fw = m.lambda * (w_matrix(o, y) - o.fw);
    return d;
}

Mat2 nearest_rotation(const Mat2& a)
{
    return rotation(std::atan2(a(1, 0) - a(0, 1), a(0, 0) + a(1, 1)));
}

Mat23 w_matrix(const ObserverState& o, const MeasuredOutput& y)
{
    Mat23 w;
    w.col(0) = -(o.z12 + o.z34 - kJ * y.i_g);
    w.rightCols<2>() = o.phi;
    return w;
}

RegressorPair regressor(const ObserverState& o, const MeasuredOutput& y, double lambda)
{
    return {lambda * (y.i_g - o.fy) - o.fq, -o.fw};
}

GridEstimate reconstruct(const Mat23& w, const Vec3& theta, double L_g)
{
    GridEstimate g;
    g.xhat = w * theta;
    g.amplitude = L_g * g.xhat.norm();
    g.omega = theta(0);
    return g;
}

Vec3 true_theta(const ObserverState& o, const MeasuredOutput& y, const Vec2& x, double omega)
{
    const Vec2 e = omega * (o.z12 + o.z34 - kJ * y.i_g) + x;
    Vec3 theta;
    theta(0) = omega;
    theta.tail<2>() = o.phi.transpose() * e;
    return theta;
}

}  // namespace vscsync
