#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace lqglab {

struct ExponentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChargeTriple {
    double gamma, c_L, c_M, Q, kappa_small, kappa_large;
};

inline ChargeTriple charges_from_gamma(double gamma) {
    if (!(gamma > 0 && gamma <= 2)) throw ExponentError("gamma out of range (0,2]");
    const double Q = 2 / gamma + gamma / 2;
    const double cL = 1 + 6 * Q * Q;
    return {gamma, cL, 26 - cL, Q, gamma * gamma, 16 / (gamma * gamma)};
}

// Root in (0,2] of 1 + 6 Q(γ)^2 = 26 - c_M.
inline double gamma_from_cM(double c_M) {
    if (!(c_M <= 1)) throw ExponentError("c_M > 1 has no gamma in (0,2]");
    const double Q = std::sqrt((25 - c_M) / 6);
    const double disc = std::sqrt((1 - c_M) / 6);  // sqrt(Q^2 - 4)
    return 4 / (Q + disc);
}

inline double mot_correlation(double kappa) {
    if (!(kappa > 4)) throw ExponentError("kappa must exceed 4");
    return -std::cos(4 * std::numbers::pi / kappa);
}

inline double mot_correlation_from_gamma(double gamma) { return mot_correlation(charges_from_gamma(gamma).kappa_large); }

inline double conformal_weight(double alpha, double gamma) {
    const double Q = charges_from_gamma(gamma).Q;
    return alpha / 2 * (Q - alpha / 2);
}

inline double backbone_function(double x) {
    return std::sqrt(36 * x + 3) / 4 + std::sin(2 * std::numbers::pi * std::sqrt(12 * x + 1) / 3);
}

struct BackboneResult {
    double root, residual, bracket;
    int sign_changes;  // over the open-interval scan
};

// Scan (1/4, 2/3) on `scan` interior points, then bisect the bracket until the
// width is below tol and no further split is representable.
inline BackboneResult backbone_exponent(double tol = 1e-12, int scan = 10000) {
    if (!(tol > 0)) throw ExponentError("tol must be positive");
    const double lo = 0.25, hi = 2.0 / 3.0;
    int changes = 0;
    double a = 0, b = 0;
    double xp = lo + (hi - lo) / (scan + 1), fp = backbone_function(xp);
    for (int k = 2; k <= scan; ++k) {
        double x = lo + (hi - lo) * k / (scan + 1), f = backbone_function(x);
        if ((fp < 0) != (f < 0)) {
            if (changes == 0) a = xp, b = x;
            ++changes;
        }
        xp = x, fp = f;
    }
    if (changes == 0) throw ExponentError("no sign change in bracket");
    double fa = backbone_function(a);
    for (;;) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        double fm = backbone_function(m);
        if (fm == 0) {
            a = b = m;
            break;
        }
        if ((fm < 0) == (fa < 0))
            a = m, fa = fm;
        else
            b = m;
        if (b - a < tol * 1e-4 && std::abs(fm) < tol * 1e-4) break;
    }
    double fa2 = std::abs(backbone_function(a)), fb2 = std::abs(backbone_function(b));
    double x = fa2 <= fb2 ? a : b;
    return {x, std::abs(backbone_function(x)), b - a, changes};
}

// Site percolation on the triangular lattice in axial coordinates (i,j):
// position (i + j/2, j·√3/2), six neighbours.
class TriangularDisk {
public:
    explicit TriangularDisk(double radius) : radius_(radius) {
        M_ = int(std::ceil(2 * radius)) + 2;
        W_ = 2 * M_ + 1;
        dist_.assign(std::size_t(W_) * W_, 0.0);
        for (int i = -M_; i <= M_; ++i)
            for (int j = -M_; j <= M_; ++j) {
                double x = i + 0.5 * j, y = j * std::sqrt(3.0) / 2;
                dist_[index(i, j)] = std::sqrt(x * x + y * y);
            }
    }

    int span() const { return M_; }
    std::size_t size() const { return dist_.size(); }
    std::size_t index(int i, int j) const { return std::size_t(i + M_) * W_ + std::size_t(j + M_); }
    double dist(std::size_t s) const { return dist_[s]; }
    int ci(std::size_t s) const { return int(s / W_) - M_; }
    int cj(std::size_t s) const { return int(s % W_) - M_; }
    double radius() const { return radius_; }

    template <class Fn>
    void neighbours(std::size_t s, Fn&& fn) const {
        static constexpr int di[6] = {1, -1, 0, 0, 1, -1}, dj[6] = {0, 0, 1, -1, -1, 1};
        int i = ci(s), j = cj(s);
        for (int k = 0; k < 6; ++k) {
            int a = i + di[k], b = j + dj[k];
            if (a < -M_ || a > M_ || b < -M_ || b > M_) continue;
            fn(index(a, b));
        }
    }

private:
    double radius_;
    int M_, W_;
    std::vector<double> dist_;
};

enum class ArmType { one_arm_blue, two_arm_bichromatic };

struct ArmAnnulus {
    double r, R, p_hat, stderr_;
    long hits;
};

struct ArmEstimate {
    double exponent = 0, stderr_ = 0;
    std::vector<ArmAnnulus> annuli;
    long trials = 0;
};

struct LogLogFit {
    double slope, intercept;
};

// Unweighted least squares of log y on log x.
inline LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ExponentError("insufficient radii");
    double mx = 0, my = 0;
    const double n = double(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) mx += std::log(x[k]), my += std::log(y[k]);
    mx /= n, my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        double dx = std::log(x[k]) - mx;
        sxy += dx * (std::log(y[k]) - my), sxx += dx * dx;
    }
    if (sxx == 0) throw ExponentError("insufficient radii");
    return {sxy / sxx, my - sxy / sxx * mx};
}

namespace detail {

// Per trial: the largest distance reached by blue (resp. yellow) clusters of
// annulus sites started from the inner boundary |z| in [r0, r0+1).
struct ArmReach {
    double blue, yellow;
};

inline ArmReach arm_reach(const TriangularDisk& disk, const std::vector<std::size_t>& inner, double r0, double p,
                          std::uint64_t seed, std::uint64_t trial, bool yellow_too, std::vector<std::uint64_t>& stamp,
                          std::vector<std::size_t>& queue) {
    const std::uint64_t thresh = p >= 1 ? ~0ull : std::uint64_t(std::ldexp(p, 64));
    auto blue = [&](std::size_t s) { return p >= 1 || Philox::at(seed, trial, s) < thresh; };
    const double Rmax = disk.radius();
    ArmReach out{0, 0};
    for (int colour = 0; colour < (yellow_too ? 2 : 1); ++colour) {
        const std::uint64_t mark = 2 * trial + colour + 1;
        double reach = 0;
        queue.clear();
        for (std::size_t s : inner) {
            if (blue(s) == (colour == 0)) {
                stamp[s] = mark;
                queue.push_back(s);
            }
        }
        for (std::size_t q = 0; q < queue.size(); ++q) {
            std::size_t s = queue[q];
            reach = std::max(reach, disk.dist(s));
            disk.neighbours(s, [&](std::size_t u) {
                if (stamp[u] == mark) return;
                double d = disk.dist(u);
                if (d < r0 || d > Rmax) return;
                if (blue(u) != (colour == 0)) return;
                stamp[u] = mark;
                queue.push_back(u);
            });
        }
        (colour == 0 ? out.blue : out.yellow) = reach;
    }
    return out;
}

}  // namespace detail

// Nested annuli A(r0, R_k), R_k = radii[k] (> r0). A crossing of A(r0,R) is a
// monochromatic path from |z| < r0+1 to |z| >= R - 1 inside r0 <= |z| <= R.
// Decay exponents are reported positive: p ~ (R/r0)^{-α}.
inline ArmEstimate arm_exponent_mc(ArmType type, double r0, const std::vector<double>& radii, long trials,
                                   std::uint64_t seed, int threads = 0, double p = 0.5) {
    if (radii.size() < 2) throw ExponentError("insufficient radii");
    for (std::size_t k = 0; k < radii.size(); ++k)
        if (radii[k] <= r0 + 1 || (k && radii[k] <= radii[k - 1])) throw ExponentError("radii must increase above r0");
    if (trials < 20) throw ExponentError("need at least 20 trials");
    const double Rmax = radii.back();
    TriangularDisk disk(Rmax);
    const bool two = type == ArmType::two_arm_bichromatic;
    std::vector<std::size_t> inner;
    for (std::size_t s = 0; s < disk.size(); ++s)
        if (disk.dist(s) >= r0 && disk.dist(s) < r0 + 1) inner.push_back(s);
    std::vector<double> reach(trials);
    threads = thread_count(threads);
    std::vector<std::vector<std::uint64_t>> stamps(threads, std::vector<std::uint64_t>(disk.size(), 0));
    std::vector<std::vector<std::size_t>> queues(threads);
    parallel_for(std::size_t(trials), threads, [&](std::size_t t, int w) {
        auto r = detail::arm_reach(disk, inner, r0, p, seed, t, two, stamps[w], queues[w]);
        reach[t] = two ? std::min(r.blue, r.yellow) : r.blue;
    });

    const int B = 20;
    auto hit_counts = [&](const std::vector<int>& blocks) {
        std::vector<double> ph(radii.size(), 0.0);
        long n = 0;
        for (int b : blocks) {
            long lo = trials * b / B, hi = trials * (b + 1) / B;
            n += hi - lo;
            for (long t = lo; t < hi; ++t)
                for (std::size_t k = 0; k < radii.size(); ++k) ph[k] += reach[t] >= radii[k] - 1;
        }
        for (auto& v : ph) v /= double(n);
        return ph;
    };
    auto fit = [&](const std::vector<double>& ph) {
        std::vector<double> x, y;
        for (std::size_t k = 0; k < radii.size(); ++k)
            if (ph[k] > 0) x.push_back(radii[k] / r0), y.push_back(ph[k]);
        return -loglog_fit(x, y).slope;
    };

    std::vector<int> all(B);
    for (int b = 0; b < B; ++b) all[b] = b;
    auto ph = hit_counts(all);
    ArmEstimate est;
    est.trials = trials;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        double se = std::sqrt(std::max(ph[k] * (1 - ph[k]), 1e-300) / double(trials));
        est.annuli.push_back({r0, radii[k], ph[k], se, std::lround(ph[k] * double(trials))});
    }
    est.exponent = fit(ph);

    // block bootstrap over trial blocks
    Philox g(seed, 0xB007);
    const int reps = 400;
    double m = 0, m2 = 0;
    int used = 0;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<int> pick(B);
        for (auto& b : pick) b = int(uniform_below(g, B));
        try {
            double e = fit(hit_counts(pick));
            m += e, m2 += e * e, ++used;
        } catch (const ExponentError&) {
        }
    }
    if (used > 1) {
        m /= used;
        est.stderr_ = std::sqrt(std::max(m2 / used - m * m, 0.0) * used / (used - 1));
    }
    if (!(est.stderr_ > 0)) est.stderr_ = std::numeric_limits<double>::min();
    return est;
}

// Ratio-2 radii rmin, 2·rmin, ... up to rmax.
inline std::vector<double> dyadic_radii(double rmin, double rmax) {
    std::vector<double> r;
    for (double R = rmin; R <= rmax + 1e-9; R *= 2) r.push_back(R);
    return r;
}

}  // namespace lqglab
