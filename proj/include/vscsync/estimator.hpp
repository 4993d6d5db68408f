#pragma once

#include <deque>
#include <optional>
#include <span>

#include "vscsync/observer.hpp"
#include "vscsync/signals.hpp"

namespace vscsync {

enum class GainNorm { Frobenius, Spectral };

/// What happens to dF/dt once ||F|| reaches M.
///  Literal:    dF/dt = 0 (forgetting and decrease both frozen).
///  Hysteresis: forgetting off, decrease term kept; forgetting resumes once
///              ||F|| < 0.99 M.
enum class FreezeMode { Literal, Hysteresis };

struct EstimatorGains {
    double alpha = 1e3;
    double beta = 1e3;
    double M = 100.0;
    double f0 = 1.0;
    GainNorm norm = GainNorm::Frobenius;
    FreezeMode freeze = FreezeMode::Hysteresis;

    void validate() const;
};

struct EstimatorState {
    Vec3 theta = Vec3::Zero();
    Mat3 F = Mat3::Identity();
    /// Branch of the switching law in force for the next step; set by
    /// lsff_post_step, constant within a step.
    bool capped = false;

    static EstimatorState initial(const Vec3& theta0, const EstimatorGains& g);
};

double gain_norm(const Mat3& F, GainNorm norm);

/// d(theta)/dt = alpha F Om^T (Y - Om theta);
/// dF/dt = -alpha F Om^T Om F + beta F unless e.capped, else per FreezeMode.
/// The returned struct holds derivatives; its capped flag is unused.
EstimatorState lsff_deriv(const EstimatorState& e, const RegressorPair& r, const EstimatorGains& g);

/// Symmetrize F and choose the branch for the next step of length h. The
/// forgetting term alone can grow F by at most exp(beta h) over the step, so
/// the cap engages once ||F|| exp(beta h) > M and ||F|| <= M holds at every
/// step boundary. With h = 0 this is the plain test ||F|| > M.
void lsff_post_step(EstimatorState& e, const EstimatorGains& g, double h = 0.0);

struct RegressorSample {
    double t = 0.0;
    Mat23 omega = Mat23::Zero();
};

struct Gramian {
    Mat3 G = Mat3::Zero();
    double min_eig = 0.0;
};

double min_eigenvalue(const Mat3& symmetric);

/// Trapezoidal int_{t_end - T}^{t_end} Om^T Om ds over the trailing window of
/// `history` (sorted by t). Throws InsufficientHistory when the history spans
/// less than T.
Gramian pe_gramian(std::span<const RegressorSample> history, double window);

/// Streaming version of pe_gramian for fixed-step samples.
class PeMonitor {
  public:
    explicit PeMonitor(double window) : window_(window) {}

    void push(double t, const Mat23& omega);
    /// Empty until the window is filled.
    std::optional<Gramian> current() const;

  private:
    struct Slice {
        double t_lo;
        Mat3 area;  // trapezoid over [t_lo, next sample]
    };

    double window_;
    std::optional<double> t_first_;
    std::optional<RegressorSample> last_;
    std::deque<Slice> slices_;
    Mat3 sum_ = Mat3::Zero();
    std::size_t pushes_since_rebuild_ = 0;
};

}  // namespace vscsync
