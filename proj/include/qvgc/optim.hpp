// Copyright 2026 The qvgc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Classical optimisers: COBYLA and NFT (derivative free) and Adam.
 *
 * Both derivative-free methods report progress through an optional callback
 * that may return false to stop early; the training loops use it to run
 * epoch-level validation and early stopping without the optimisers knowing
 * about either.
 */
#pragma once

#include "qvgc/error.hpp"
#include "qvgc/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace qvgc {

using Objective = std::function<double(std::span<const double>)>;

struct TraceRecord {
    std::size_t iteration = 0;
    std::size_t fevals = 0;
    double best_value = 0.0;
};

/// Return false to stop the optimiser. `params` is the current best point.
using IterationCallback = std::function<bool(const TraceRecord &, std::span<const double>)>;

struct OptimResult {
    std::vector<double> params;
    double value = 0.0;
    std::size_t fevals = 0;
    std::size_t iterations = 0;
    bool stopped_by_callback = false;
};

// ---------------------------------------------------------------------------
// COBYLA
// ---------------------------------------------------------------------------

struct CobylaOptions {
    double rhobeg = 1.0;
    double rhoend = 1e-4;
    /// 0 selects 100 * dim.
    std::size_t maxfun = 0;
};

namespace detail {

/// Inverse of the n x n matrix whose column j is cols[j]; returned row-wise,
/// so inv[j] . cols[k] == (j == k).
inline std::vector<std::vector<double>>
invert_columns(const std::vector<std::vector<double>> &cols) {
    const std::size_t n = cols.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(2 * n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a[i][j] = cols[j][i];
        }
        a[i][n + i] = 1.0;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) {
                piv = r;
            }
        }
        if (a[piv][c] == 0.0) {
            throw NumericalError("COBYLA simplex became degenerate");
        }
        std::swap(a[c], a[piv]);
        const double inv = 1.0 / a[c][c];
        for (auto &v : a[c]) {
            v *= inv;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r != c && a[r][c] != 0.0) {
                const double f = a[r][c];
                for (std::size_t k = 0; k < 2 * n; ++k) {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    std::vector<std::vector<double>> out(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out[i][j] = a[i][n + j];
        }
    }
    return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

} // namespace detail

/**
 * Unconstrained COBYLA (Powell's constrained optimisation by linear
 * approximation with no constraints).
 *
 * A simplex of n+1 evaluated points defines a linear model of the objective.
 * Each iteration either minimises that model inside a ball of radius rho
 * around the best vertex and swaps the trial point into the simplex, or, if
 * the simplex has become too flat or too stretched relative to rho, moves one
 * vertex to restore its geometry. When the model stops predicting progress,
 * rho is halved until it reaches rhoend.
 */
inline OptimResult cobyla_minimize(const Objective &objective, std::vector<double> x0,
                                   CobylaOptions opt = {},
                                   const IterationCallback &callback = {}) {
    const std::size_t n = x0.size();
    if (n < 1) {
        throw UsageError("COBYLA needs at least one variable");
    }
    if (!(opt.rhobeg > opt.rhoend && opt.rhoend > 0.0)) {
        throw UsageError("COBYLA requires rhobeg > rhoend > 0");
    }
    const std::size_t maxfun = opt.maxfun == 0 ? 100 * n : opt.maxfun;

    // Simplex acceptability and vertex replacement constants from Powell.
    constexpr double kAlpha = 0.25;
    constexpr double kBeta = 2.1;
    constexpr double kGamma = 0.5;
    constexpr double kDelta = 1.1;

    OptimResult res;
    res.params = x0;
    res.value = std::numeric_limits<double>::infinity();
    bool done = false;

    auto eval = [&](std::span<const double> x) {
        const double v = objective(x);
        if (!std::isfinite(v)) {
            throw NumericalError("COBYLA: objective returned a non-finite value");
        }
        ++res.fevals;
        if (v < res.value) {
            res.value = v;
            res.params.assign(x.begin(), x.end());
        }
        if (callback && !callback({res.iterations, res.fevals, res.value}, res.params)) {
            res.stopped_by_callback = true;
            done = true;
        }
        if (res.fevals >= maxfun) {
            done = true;
        }
        return v;
    };

    double rho = opt.rhobeg;
    std::vector<double> pole = x0;
    double fpole = eval(pole);
    std::vector<std::vector<double>> disp(n, std::vector<double>(n, 0.0));
    std::vector<double> fv(n, std::numeric_limits<double>::infinity());
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n && !done; ++j) {
        disp[j][j] = rho;
        x = pole;
        x[j] += rho;
        fv[j] = eval(x);
    }
    if (done) {
        return res;
    }
    auto simi = detail::invert_columns(disp);

    std::vector<double> vsig(n);
    std::vector<double> veta(n);
    std::vector<double> grad(n);
    std::vector<double> step(n);
    bool branch = false;

    while (!done) {
        ++res.iterations;

        // Move the pole to the best vertex.
        std::size_t best = n;
        double fbest = fpole;
        for (std::size_t j = 0; j < n; ++j) {
            if (fv[j] < fbest) {
                fbest = fv[j];
                best = j;
            }
        }
        if (best < n) {
            const std::vector<double> shift = disp[best];
            for (std::size_t i = 0; i < n; ++i) {
                pole[i] += shift[i];
            }
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                    disp[j][i] = j == best ? -shift[i] : disp[j][i] - shift[i];
                }
            }
            std::swap(fv[best], fpole);
            simi = detail::invert_columns(disp);
        }

        bool acceptable = true;
        for (std::size_t j = 0; j < n; ++j) {
            vsig[j] = 1.0 / std::sqrt(detail::dot(simi[j], simi[j]));
            veta[j] = std::sqrt(detail::dot(disp[j], disp[j]));
            if (vsig[j] < kAlpha * rho || veta[j] > kBeta * rho) {
                acceptable = false;
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                grad[i] += (fv[j] - fpole) * simi[j][i];
            }
        }

        if (!branch && !acceptable) {
            // Geometry step: replace the vertex that is furthest away, or
            // failing that the one closest to the opposite face.
            std::size_t jdrop = n;
            double worst = kBeta * rho;
            for (std::size_t j = 0; j < n; ++j) {
                if (veta[j] > worst) {
                    jdrop = j;
                    worst = veta[j];
                }
            }
            if (jdrop == n) {
                double low = kAlpha * rho;
                for (std::size_t j = 0; j < n; ++j) {
                    if (vsig[j] < low) {
                        jdrop = j;
                        low = vsig[j];
                    }
                }
            }
            const double scale = kGamma * rho * vsig[jdrop];
            for (std::size_t i = 0; i < n; ++i) {
                step[i] = scale * simi[jdrop][i];
            }
            if (detail::dot(grad, step) > 0.0) {
                for (auto &s : step) {
                    s = -s;
                }
            }
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = pole[i] + step[i];
            }
            fv[jdrop] = eval(x);
            disp[jdrop] = step;
            simi = detail::invert_columns(disp);
            continue;
        }

        // Trust-region step on the linear model.
        branch = true;
        bool reduce = false;
        const double gnorm = std::sqrt(detail::dot(grad, grad));
        if (!(gnorm > 0.0)) {
            reduce = true;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                step[i] = -rho * grad[i] / gnorm;
                x[i] = pole[i] + step[i];
            }
            const double predicted = rho * gnorm;
            const double fnew = eval(x);
            const double actual = fpole - fnew;

            std::size_t jdrop = n;
            double ratio = actual <= 0.0 ? 1.0 : 0.0;
            std::vector<double> sigbar(n);
            for (std::size_t j = 0; j < n; ++j) {
                const double t = std::abs(detail::dot(simi[j], step));
                if (t > ratio) {
                    jdrop = j;
                    ratio = t;
                }
                sigbar[j] = t * vsig[j];
            }
            double edgmax = kDelta * rho;
            std::size_t far = n;
            for (std::size_t j = 0; j < n; ++j) {
                if (sigbar[j] >= kAlpha * rho || sigbar[j] >= vsig[j]) {
                    double t = veta[j];
                    if (actual > 0.0) {
                        t = 0.0;
                        for (std::size_t i = 0; i < n; ++i) {
                            const double d = step[i] - disp[j][i];
                            t += d * d;
                        }
                        t = std::sqrt(t);
                    }
                    if (t > edgmax) {
                        far = j;
                        edgmax = t;
                    }
                }
            }
            if (far < n) {
                jdrop = far;
            }
            if (jdrop < n) {
                disp[jdrop] = step;
                fv[jdrop] = fnew;
                simi = detail::invert_columns(disp);
            }
            if (done) {
                break;
            }
            if (!(jdrop < n && actual > 0.0 && actual >= 0.1 * predicted)) {
                reduce = true;
            }
        }

        if (reduce) {
            if (!acceptable) {
                branch = false;
                continue;
            }
            if (rho > opt.rhoend) {
                rho *= 0.5;
                if (rho <= 1.5 * opt.rhoend) {
                    rho = opt.rhoend;
                }
                continue;
            }
            break;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// NFT
// ---------------------------------------------------------------------------

struct NftOptions {
    std::size_t sweeps = 1;
    /// Re-evaluate the running value after this many updates (0: never).
    std::size_t reset_interval = 32;
};

/**
 * Nakanishi-Fujii-Todo sequential minimisation.
 *
 * Assumes f restricted to any single coordinate is a + b cos(t - c). For
 * coordinate k, the current value f(t) and f(t +- pi/2) fix the sinusoid:
 *
 *     f(t + s) = a + B cos s + C sin s,
 *     a = (f+ + f-)/2,  B = f(t) - a,  C = (f+ - f-)/2,
 *
 * whose minimum a - sqrt(B^2 + C^2) sits at s = atan2(C, B) + pi. The running
 * value is carried forward, so each update costs two evaluations. The
 * callback fires after every single-coordinate update.
 */
inline OptimResult nft_minimize(const Objective &objective, std::vector<double> x0,
                                NftOptions opt = {}, const IterationCallback &callback = {}) {
    const std::size_t n = x0.size();
    if (n < 1) {
        throw UsageError("NFT needs at least one variable");
    }
    OptimResult res;
    auto eval = [&](std::span<const double> x) {
        const double v = objective(x);
        if (!std::isfinite(v)) {
            throw NumericalError("NFT: objective returned a non-finite value");
        }
        ++res.fevals;
        return v;
    };

    std::vector<double> x = std::move(x0);
    double value = eval(x);
    std::size_t updates = 0;
    for (std::size_t sweep = 0; sweep < opt.sweeps; ++sweep) {
        for (std::size_t k = 0; k < n; ++k) {
            if (opt.reset_interval > 0 && updates > 0 && updates % opt.reset_interval == 0) {
                value = eval(x);
            }
            const double t = x[k];
            x[k] = t + std::numbers::pi / 2;
            const double fp = eval(x);
            x[k] = t - std::numbers::pi / 2;
            const double fm = eval(x);
            const double a = 0.5 * (fp + fm);
            const double b = value - a;
            const double c = 0.5 * (fp - fm);
            const double amp = std::hypot(b, c);
            if (amp > 1e-14) {
                double s = std::atan2(c, b) + std::numbers::pi;
                if (s > std::numbers::pi) {
                    s -= 2.0 * std::numbers::pi;
                }
                x[k] = t + s;
                value = a - amp;
            } else {
                x[k] = t;
            }
            ++updates;
            res.iterations = updates;
            if (callback && !callback({updates, res.fevals, value}, x)) {
                res.stopped_by_callback = true;
                res.params = x;
                res.value = value;
                return res;
            }
        }
    }
    res.params = std::move(x);
    res.value = value;
    return res;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamOptions options;
    std::vector<double> m;
    std::vector<double> v;
    std::size_t t = 0;

    AdamState() = default;
    AdamState(std::size_t n, AdamOptions opt) : options(opt), m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update of `params` in place.
inline void adam_step(AdamState &state, std::span<double> params,
                      std::span<const double> grads) {
    if (params.size() != state.m.size() || grads.size() != state.m.size()) {
        throw ArityError("adam_step: parameter, gradient and moment sizes differ");
    }
    require_finite(grads, "Adam gradient");
    ++state.t;
    const auto &o = state.options;
    const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * grads[i];
        state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        params[i] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
    }
}

} // namespace qvgc
