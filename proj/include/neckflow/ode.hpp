#pragma once

// Dormand-Prince 5(4) with the standard continuous extension.
//
// The stepper is templated on the state dimension and keeps the FSAL slope
// between steps. Accepted steps are reported to an observer together with
// their dense-output coefficients so callers can locate events or freeze the
// whole path for later interpolation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "neckflow/error.hpp"

namespace neckflow::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

/// One accepted step with its 4th-order continuous extension.
template <std::size_t N>
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    Vec<N> r1{}, r2{}, r3{}, r4{}, r5{};

    double t1() const noexcept { return t0 + h; }

    Vec<N> eval(double t) const noexcept
    {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        Vec<N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        return y;
    }
};

struct StepperOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_init = 0.0;       ///< 0 selects the initial step automatically
    double h_max = 0.0;        ///< 0 means unbounded
    double h_min_rel = 1e-14;  ///< underflow threshold relative to max(1, |t|)
    std::size_t max_steps = 50'000'000;
};

/// Always accepts; used when no auxiliary error controller is needed.
struct NoAuxError {
    template <class V>
    double operator()(const V&, const V&) const noexcept { return 0.0; }
};

template <std::size_t N, class Rhs, class AuxError = NoAuxError>
class Dopri5 {
public:
    Dopri5(Rhs rhs, StepperOptions opts, AuxError aux = {})
        : rhs_(std::move(rhs)), opts_(opts), aux_(std::move(aux)) {}

    void reset(double t, const Vec<N>& y)
    {
        t_ = t;
        y_ = y;
        f_ = rhs_(t, y);
        h_ = opts_.h_init;
        have_h_ = h_ != 0.0;
    }

    double time() const noexcept { return t_; }
    const Vec<N>& state() const noexcept { return y_; }
    const Vec<N>& slope() const noexcept { return f_; }
    std::size_t steps_taken() const noexcept { return n_steps_; }
    Rhs& rhs() noexcept { return rhs_; }

    /// Integrate towards t_target (either direction). The observer receives
    /// (const DenseStep<N>&, const Vec<N>& y_new) for every accepted step and
    /// returns false to stop early. Returns true when t_target was reached.
    template <class Observer>
    bool advance(double t_target, Observer&& observer)
    {
        const double dir = t_target >= t_ ? 1.0 : -1.0;
        if (t_target == t_)
            return true;
        if (!have_h_) {
            h_ = initial_step(dir);
            have_h_ = true;
        }
        h_ = dir * std::fabs(h_);
        bool rejected_last = false;
        while (dir * (t_target - t_) > 0.0) {
            if (++n_steps_ > opts_.max_steps)
                throw IntegrationError("step budget exhausted", t_);
            double h = h_;
            if (opts_.h_max > 0.0 && std::fabs(h) > opts_.h_max)
                h = dir * opts_.h_max;
            bool last = false;
            if (dir * (t_ + h - t_target) >= 0.0) {
                h = t_target - t_;
                last = true;
            }
            if (std::fabs(h) < opts_.h_min_rel * std::max(1.0, std::fabs(t_)) && !last)
                throw IntegrationError("step size underflow", t_);

            Vec<N> y1, f1;
            DenseStep<N> dense;
            const double err = attempt(h, y1, f1, dense);
            if (!(err <= 1.0)) {
                const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
                h_ = h * fac;
                rejected_last = true;
                if (std::fabs(h_) < opts_.h_min_rel * std::max(1.0, std::fabs(t_)))
                    throw IntegrationError("step size underflow", t_);
                continue;
            }
            double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            fac = std::clamp(fac, 0.2, rejected_last ? 1.0 : 5.0);
            rejected_last = false;
            if (!last || std::fabs(h * fac) > std::fabs(h_))
                h_ = h * fac;
            t_ = last ? t_target : t_ + h;
            y_ = y1;
            f_ = f1;
            if (!observer(static_cast<const DenseStep<N>&>(dense), static_cast<const Vec<N>&>(y_)))
                return false;
        }
        return true;
    }

    /// A single explicit step of size h from the current point, without
    /// error control. Used to re-evaluate a state at a located event time.
    Vec<N> probe(double h)
    {
        Vec<N> y1, f1;
        DenseStep<N> dense;
        attempt(h, y1, f1, dense);
        return y1;
    }

private:
    double initial_step(double dir)
    {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opts_.atol + opts_.rtol * std::fabs(y_[i]);
            d0 += (y_[i] / sc) * (y_[i] / sc);
            d1 += (f_[i] / sc) * (f_[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        if (opts_.h_max > 0.0)
            h0 = std::min(h0, opts_.h_max);
        Vec<N> y1;
        for (std::size_t i = 0; i < N; ++i)
            y1[i] = y_[i] + dir * h0 * f_[i];
        const Vec<N> f1 = rhs_(t_ + dir * h0, y1);
        double d2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opts_.atol + opts_.rtol * std::fabs(y_[i]);
            const double d = (f1[i] - f_[i]) / sc;
            d2 += d * d;
        }
        d2 = std::sqrt(d2 / N) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        double h = std::min(100.0 * h0, h1);
        if (opts_.h_max > 0.0)
            h = std::min(h, opts_.h_max);
        return dir * h;
    }

    double attempt(double h, Vec<N>& y1, Vec<N>& f1, DenseStep<N>& dense)
    {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                                a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                                a75 = -2187.0 / 6784, a76 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                                d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                                d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

        const Vec<N>& y = y_;
        const Vec<N>& k1 = f_;
        Vec<N> tmp;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        const Vec<N> k2 = rhs_(t_ + c2 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        const Vec<N> k3 = rhs_(t_ + c3 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        const Vec<N> k4 = rhs_(t_ + c4 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        const Vec<N> k5 = rhs_(t_ + c5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const Vec<N> k6 = rhs_(t_ + h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f1 = rhs_(t_ + h, y1);
        const Vec<N>& k7 = f1;

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = opts_.atol + opts_.rtol * std::max(std::fabs(y[i]), std::fabs(y1[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / N);
        if (!std::isfinite(err))
            return std::numeric_limits<double>::infinity();
        err = std::max(err, aux_(y, y1));

        dense.t0 = t_;
        dense.h = h;
        for (std::size_t i = 0; i < N; ++i) {
            dense.r1[i] = y[i];
            dense.r2[i] = y1[i] - y[i];
            dense.r3[i] = h * k1[i] - dense.r2[i];
            dense.r4[i] = dense.r2[i] - h * k7[i] - dense.r3[i];
            dense.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        return err;
    }

    Rhs rhs_;
    StepperOptions opts_;
    AuxError aux_;
    double t_ = 0.0;
    Vec<N> y_{};
    Vec<N> f_{};
    double h_ = 0.0;
    bool have_h_ = false;
    std::size_t n_steps_ = 0;
};

} // namespace neckflow::ode
