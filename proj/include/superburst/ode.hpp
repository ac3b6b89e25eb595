#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta pair with FSAL and the fourth-order
// continuous extension of Hairer, Norsett & Wanner. Works for any Eigen column
// vector (real or complex); the error norm is the scaled max-norm so that
// components that stay identically zero never influence step control.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <sstream>

#include "superburst/linalg.hpp"

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace superburst {

/// Flushes subnormal results to zero on this thread while alive. Populations
/// that decay past 1e-308 otherwise slow every arithmetic op on them ~10x.
class ScopedFlushDenormals {
 public:
#if defined(__SSE__)
  ScopedFlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~ScopedFlushDenormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

struct OdeTolerances {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 0.0;  // 0 selects a step automatically
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-13;    // relative to max(1, |t|)
  std::size_t max_steps = 50'000'000;
};

template <typename Vector>
class DormandPrince {
 public:
  using Rhs = std::function<void(double, const Vector&, Vector&)>;

  DormandPrince(Rhs rhs, OdeTolerances tol) : rhs_(std::move(rhs)), tol_(tol) {}

  void reset(double t0, const Vector& y0) {
    t_ = t_prev_ = t0;
    y_ = y0;
    y_prev_ = y0;
    const auto n = y0.size();
    for (Vector* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &dense_k1_, &dense_k3_,
                      &dense_k4_, &dense_k5_, &dense_k6_, &dense_k7_})
      k->resize(n);
    ytmp_.resize(n);
    rhs_(t_, y_, k1_);
    h_ = tol_.initial_step > 0.0 ? tol_.initial_step : initial_step();
    accepted_ = rejected_ = 0;
    has_step_ = false;
  }

  double t() const { return t_; }
  double t_prev() const { return t_prev_; }
  const Vector& y() const { return y_; }
  const Vector& derivative() const { return k1_; }
  std::size_t accepted_steps() const { return accepted_; }
  std::size_t rejected_steps() const { return rejected_; }

  /// Takes one accepted step that does not pass t_limit.
  void step(double t_limit) {
    using std::abs;
    for (;;) {
      if (accepted_ + rejected_ >= tol_.max_steps) {
        fail("step budget exhausted");
      }
      double h = std::min(h_, tol_.max_step);
      bool clipped = false;
      if (t_ + h >= t_limit) {
        h = t_limit - t_;
        clipped = true;
      }
      if (h <= tol_.min_step * std::max(1.0, abs(t_))) fail("step size underflow");

      ytmp_ = y_ + h * (a21 * k1_);
      rhs_(t_ + c2 * h, ytmp_, k2_);
      ytmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
      rhs_(t_ + c3 * h, ytmp_, k3_);
      ytmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
      rhs_(t_ + c4 * h, ytmp_, k4_);
      ytmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
      rhs_(t_ + c5 * h, ytmp_, k5_);
      ytmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
      rhs_(t_ + h, ytmp_, k6_);
      // 5th-order solution, stored in ytmp_ (FSAL: k7 = f(t+h, ynew)).
      ytmp_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
      rhs_(t_ + h, ytmp_, k7_);

      const double err = error_norm(h);
      if (!std::isfinite(err)) {
        ++rejected_;
        h_ = 0.2 * h;
        continue;
      }
      if (err <= 1.0) {
        ++accepted_;
        y_prev_.swap(y_);
        y_.swap(ytmp_);
        // Keep the stages of this step for the continuous extension.
        dense_k1_.swap(k1_);
        dense_k3_.swap(k3_);
        dense_k4_.swap(k4_);
        dense_k5_.swap(k5_);
        dense_k6_.swap(k6_);
        k1_ = k7_;
        dense_k7_.swap(k7_);
        t_prev_ = t_;
        t_ = clipped ? t_limit : t_ + h;
        h_used_ = h;
        has_step_ = true;
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        // Do not let a clipped final step shrink the next step.
        h_ = clipped ? std::max(h_, h * fac) : h * fac;
        return;
      }
      ++rejected_;
      h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }

  /// Continuous extension on [t_prev, t] of the last accepted step.
  void dense(double t, Vector& out) const {
    if (!has_step_ || t == t_) {
      out = y_;
      return;
    }
    const double h = h_used_;
    const double theta = (t - t_prev_) / h;
    const double theta1 = 1.0 - theta;
    // rcont terms of DOPRI5.
    Vector ydiff = y_ - y_prev_;
    Vector bspl = h * dense_k1_ - ydiff;
    Vector r4 = ydiff - h * dense_k7_ - bspl;
    Vector r5 = h * (d1 * dense_k1_ + d3 * dense_k3_ + d4 * dense_k4_ + d5 * dense_k5_ +
                     d6 * dense_k6_ + d7 * dense_k7_);
    out = y_prev_ + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
  }

 private:
  [[noreturn]] void fail(const char* what) const {
    std::ostringstream os;
    os << "Dormand-Prince: " << what << " at t = " << t_ << " (h = " << h_ << ")";
    throw IntegrationFailure(os.str());
  }

  double error_norm(double h) {
    // Embedded error estimate h * sum(e_i k_i), scaled component-wise.
    Vector err = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    if (err.size() == 0) return 0.0;
    const Eigen::ArrayXd scale =
        tol_.abs_tol + tol_.rel_tol * y_.cwiseAbs().cwiseMax(ytmp_.cwiseAbs()).array();
    return (err.cwiseAbs().array() / scale).maxCoeff();
  }

  double initial_step() {
    if (y_.size() == 0) return 1e-3;
    const Eigen::ArrayXd scale = tol_.abs_tol + tol_.rel_tol * y_.cwiseAbs().array();
    const double d0 = (y_.cwiseAbs().array() / scale).maxCoeff();
    const double d1n = (k1_.cwiseAbs().array() / scale).maxCoeff();
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    return std::min(h0, tol_.max_step);
  }

  Rhs rhs_;
  OdeTolerances tol_;
  double t_ = 0.0, t_prev_ = 0.0, h_ = 0.0, h_used_ = 0.0;
  bool has_step_ = false;
  std::size_t accepted_ = 0, rejected_ = 0;
  Vector y_, y_prev_, ytmp_;
  Vector k1_, k2_, k3_, k4_, k5_, k6_, k7_;
  Vector dense_k1_, dense_k3_, dense_k4_, dense_k5_, dense_k6_, dense_k7_;

  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

/// Integrates from times[0] (where the solver must already be reset) and reports
/// the solution at every sample time. The observer returns false to stop early;
/// the number of samples delivered is returned.
template <typename Vector, typename Observer>
std::size_t integrate_samples(DormandPrince<Vector>& solver, std::span<const double> times,
                              Observer&& observer) {
  if (times.empty()) return 0;
  ScopedFlushDenormals ftz;
  Vector y_sample;
  std::size_t i = 0;
  if (!observer(i, times[0], solver.y())) return 1;
  for (i = 1; i < times.size(); ++i) {
    while (solver.t() < times[i]) solver.step(times.back());
    solver.dense(times[i], y_sample);
    if (!observer(i, times[i], y_sample)) return i + 1;
  }
  return times.size();
}

}  // namespace superburst
