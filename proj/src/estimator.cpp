#include "vscsync/estimator.hpp"

#include <cmath>

#include "vscsync/errors.hpp"

namespace vscsync {

void EstimatorGains::validate() const
{
    if (!(alpha > 0.0) || !(f0 > 0.0) || !(beta >= 0.0) || !(M > 0.0)) {
        throw ConfigError("estimator gains require alpha > 0, f0 > 0, beta >= 0, M > 0");
    }
}

EstimatorState EstimatorState::initial(const Vec3& theta0, const EstimatorGains& g)
{
    EstimatorState e;
    e.theta = theta0;
    e.F = Mat3::Identity() / g.f0;
    return e;
}

double gain_norm(const Mat3& F, GainNorm norm)
{
    if (norm == GainNorm::Frobenius) {
        return F.norm();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (F + F.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

EstimatorState lsff_deriv(const EstimatorState& e, const RegressorPair& r, const EstimatorGains& g)
{
    EstimatorState d;
    d.theta = g.alpha * e.F * r.omega.transpose() * (r.Y - r.omega * e.theta);

    const Mat3 info = r.omega.transpose() * r.omega;
    const Mat3 decrease = -g.alpha * e.F * info * e.F;
    if (!e.capped) {
        d.F = decrease + g.beta * e.F;
    } else if (g.freeze == FreezeMode::Literal) {
        d.F.setZero();
    } else {
        d.F = decrease;
    }
    return d;
}

void lsff_post_step(EstimatorState& e, const EstimatorGains& g, double h)
{
    e.F = 0.5 * (e.F + e.F.transpose());
    const double n = gain_norm(e.F, g.norm);
    const bool at_cap = n * std::exp(g.beta * h) > g.M;
    if (g.freeze == FreezeMode::Literal) {
        e.capped = at_cap;
    } else if (at_cap) {
        e.capped = true;
    } else if (n < 0.99 * g.M) {
        e.capped = false;
    }
}

double min_eigenvalue(const Mat3& symmetric)
{
    Eigen::SelfAdjointEigenSolver<Mat3> es(symmetric, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

Gramian pe_gramian(std::span<const RegressorSample> history, double window)
{
    if (history.size() < 2 || history.back().t - history.front().t < window * (1.0 - 1e-12)) {
        throw InsufficientHistory("PE window not filled");
    }
    const double t_start = history.back().t - window;
    Gramian out;
    for (std::size_t k = history.size() - 1; k > 0; --k) {
        const auto& hi = history[k];
        const auto& lo = history[k - 1];
        if (hi.t <= t_start) {
            break;
        }
        const Mat3 a = hi.omega.transpose() * hi.omega;
        Mat3 b = lo.omega.transpose() * lo.omega;
        double t_lo = lo.t;
        if (lo.t < t_start) {
            // Partial interval: interpolate Omega linearly to the window edge.
            const double s = (t_start - lo.t) / (hi.t - lo.t);
            const Mat23 edge = lo.omega + s * (hi.omega - lo.omega);
            b = edge.transpose() * edge;
            t_lo = t_start;
        }
        out.G += 0.5 * (hi.t - t_lo) * (a + b);
    }
    out.min_eig = min_eigenvalue(out.G);
    return out;
}

void PeMonitor::push(double t, const Mat23& omega)
{
    if (!t_first_) {
        t_first_ = t;
    }
    if (last_) {
        const Mat3 area = 0.5 * (t - last_->t) *
                          (omega.transpose() * omega + last_->omega.transpose() * last_->omega);
        slices_.push_back({last_->t, area});
        sum_ += area;
    }
    last_ = RegressorSample{t, omega};

    // A slice belongs to the window when its left edge is at or after t - window.
    while (!slices_.empty() && slices_.front().t_lo < t - window_ - 1e-9 * window_) {
        sum_ -= slices_.front().area;
        slices_.pop_front();
    }
    // Running sums drift with repeated subtraction; rebuild occasionally.
    if (++pushes_since_rebuild_ >= 4096) {
        sum_.setZero();
        for (const auto& s : slices_) {
            sum_ += s.area;
        }
        pushes_since_rebuild_ = 0;
    }
}

std::optional<Gramian> PeMonitor::current() const
{
    if (!last_ || !t_first_ || last_->t - *t_first_ < window_ * (1.0 - 1e-9)) {
        return std::nullopt;
    }
    Gramian g;
    g.G = sum_;
    g.min_eig = min_eigenvalue(g.G);
    return g;
}

}  // namespace vscsync
