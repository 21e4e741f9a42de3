#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <fftw3.h>

#include "rng.hpp"

namespace lqglab {

struct FieldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Boundary { zero, free_pinned, whole_plane_pinned };

// Sites (i,j) of an nx-by-ny lattice at (x0 + i*mesh, y0 + j*mesh); mask marks D.
struct GridGeometry {
    int nx = 0, ny = 0;
    double mesh = 1.0, x0 = 0.0, y0 = 0.0;
    std::vector<char> mask;

    // interior sites of [0,1]^2 at mesh 1/n
    static GridGeometry unit_square(int n) {
        if (n < 2) throw FieldError("grid too small");
        GridGeometry g{n - 1, n - 1, 1.0 / n, 1.0 / n, 1.0 / n, {}};
        g.mask.assign(std::size_t(g.nx) * g.ny, 1);
        return g;
    }

    // sites strictly inside the unit disk at mesh 1/n
    static GridGeometry unit_disk(int n) {
        GridGeometry g{2 * n + 1, 2 * n + 1, 1.0 / n, -1.0, -1.0, {}};
        g.mask.assign(std::size_t(g.nx) * g.ny, 0);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                auto p = g.point(i, j);
                g.mask[g.index(i, j)] = std::norm(p) < 1.0 - 1e-12;
            }
        return g;
    }

    std::size_t size() const { return mask.size(); }
    std::size_t index(int i, int j) const { return std::size_t(i) * ny + j; }
    bool inside(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny && mask[index(i, j)]; }
    std::complex<double> point(int i, int j) const { return {x0 + i * mesh, y0 + j * mesh}; }
    std::complex<double> point(std::size_t s) const { return point(int(s / ny), int(s % ny)); }
    std::pair<int, int> nearest(std::complex<double> z) const {
        return {int(std::lround((z.real() - x0) / mesh)), int(std::lround((z.imag() - y0) / mesh))};
    }
    std::size_t masked_count() const {
        std::size_t c = 0;
        for (char m : mask) c += m;
        return c;
    }
};

struct GridField {
    GridGeometry geom;
    Boundary boundary = Boundary::zero;
    std::vector<double> values;  // per lattice site; zero off the mask
};

struct LqgParams {
    double gamma = 1.0;
    double Q() const { return 2.0 / gamma + gamma / 2.0; }
};

// Discrete GFF with covariance 2π·(graph Laplacian)^{-1}, so that
// Var h_ε ≈ log(1/ε) + const. Pinned variants use the Neumann Laplacian on the
// mask (free) or on a box three times larger (whole plane), fixed at one site,
// and are projected to mean zero over the mask.
class GffModel {
public:
    GffModel(GridGeometry geom, Boundary b) : geom_(std::move(geom)), b_(b) {
        if (geom_.masked_count() == 0) throw FieldError("empty mask");
        GridGeometry work = geom_;
        off_i_ = off_j_ = 0;
        if (b_ == Boundary::whole_plane_pinned) {
            off_i_ = geom_.nx, off_j_ = geom_.ny;
            work = GridGeometry{3 * geom_.nx, 3 * geom_.ny, geom_.mesh, geom_.x0 - geom_.nx * geom_.mesh,
                                geom_.y0 - geom_.ny * geom_.mesh, {}};
            work.mask.assign(std::size_t(work.nx) * work.ny, 1);
        }
        work_ = work;
        // unknowns: masked sites of work, minus the pinned one
        var_of_.assign(work.size(), -1);
        int n = 0;
        pinned_ = -1;
        for (std::size_t s = 0; s < work.size(); ++s) {
            if (!work.mask[s]) continue;
            if (b_ != Boundary::zero && pinned_ < 0) {
                pinned_ = long(s);
                continue;
            }
            var_of_[s] = n++;
        }
        if (n == 0) throw FieldError("singular system");
        site_of_.resize(n);
        for (std::size_t s = 0; s < work.size(); ++s)
            if (var_of_[s] >= 0) site_of_[var_of_[s]] = s;
        std::vector<Eigen::Triplet<double>> trip;
        for (int i = 0; i < work.nx; ++i)
            for (int j = 0; j < work.ny; ++j) {
                if (!work.inside(i, j)) continue;
                std::size_t s = work.index(i, j);
                int deg = 0;
                const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    int a = i + di[k], c = j + dj[k];
                    if (work.inside(a, c)) {
                        ++deg;
                        int u = var_of_[work.index(a, c)];
                        if (var_of_[s] >= 0 && u >= 0) trip.emplace_back(var_of_[s], u, -1.0);
                    } else if (b_ == Boundary::zero) {
                        ++deg;  // Dirichlet neighbour
                    }
                }
                if (var_of_[s] >= 0) trip.emplace_back(var_of_[s], var_of_[s], double(deg));
            }
        Eigen::SparseMatrix<double> L(n, n);
        L.setFromTriplets(trip.begin(), trip.end());
        llt_ = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>(L);
        if (llt_->info() != Eigen::Success) throw FieldError("singular system");
    }

    const GridGeometry& geometry() const { return geom_; }
    Boundary boundary() const { return b_; }

    GridField sample(Philox& g) const {
        const int n = int(site_of_.size());
        Eigen::VectorXd xi(n);
        for (int k = 0; k < n; ++k) xi[k] = normal01(g);
        // A = P^T L L^T P  =>  x = P^T L^{-T} xi has covariance A^{-1}
        Eigen::VectorXd y = llt_->matrixU().solve(xi);
        Eigen::VectorXd x = llt_->permutationPinv() * y;
        std::vector<double> work(work_.size(), 0.0);
        for (int k = 0; k < n; ++k) work[site_of_[k]] = std::sqrt(2 * std::numbers::pi) * x[k];
        return restrict_field(work);
    }

    // Cov(<w1,h>, <w2,h>) for weights on the lattice sites of the geometry.
    double covariance(const std::vector<double>& w1, const std::vector<double>& w2) const {
        auto a = lift(w1), b = lift(w2);
        Eigen::VectorXd x = llt_->solve(b);
        return 2 * std::numbers::pi * a.dot(x);
    }

    double variance(const std::vector<double>& w) const { return covariance(w, w); }

    // Cov(h(·), h(site)) as a field on the geometry.
    std::vector<double> kernel_column(std::size_t site) const {
        std::vector<double> e(geom_.size(), 0.0);
        e[site] = 1.0;
        auto b = lift(e);
        Eigen::VectorXd x = llt_->solve(b);
        std::vector<double> work(work_.size(), 0.0);
        for (std::size_t k = 0; k < site_of_.size(); ++k) work[site_of_[k]] = 2 * std::numbers::pi * x[k];
        return restrict_field(work).values;
    }

private:
    std::size_t work_index(std::size_t s) const {
        int i = int(s / geom_.ny), j = int(s % geom_.ny);
        return work_.index(i + off_i_, j + off_j_);
    }

    // weights on geometry sites -> right-hand side on unknowns, mean-projected when pinned
    Eigen::VectorXd lift(const std::vector<double>& w) const {
        std::vector<double> p(w);
        if (b_ != Boundary::zero) {
            double tot = 0;
            for (std::size_t s = 0; s < p.size(); ++s) tot += geom_.mask[s] ? p[s] : 0.0;
            double mean = tot / double(geom_.masked_count());
            for (std::size_t s = 0; s < p.size(); ++s) p[s] = geom_.mask[s] ? p[s] - mean : 0.0;
        }
        Eigen::VectorXd r = Eigen::VectorXd::Zero(Eigen::Index(site_of_.size()));
        for (std::size_t s = 0; s < p.size(); ++s) {
            if (!geom_.mask[s] || p[s] == 0.0) continue;
            int v = var_of_[work_index(s)];
            if (v >= 0) r[v] += p[s];
        }
        return r;
    }

    GridField restrict_field(const std::vector<double>& work) const {
        GridField f{geom_, b_, std::vector<double>(geom_.size(), 0.0)};
        double tot = 0;
        for (std::size_t s = 0; s < geom_.size(); ++s)
            if (geom_.mask[s]) f.values[s] = work[work_index(s)], tot += f.values[s];
        if (b_ != Boundary::zero) {
            double mean = tot / double(geom_.masked_count());
            for (std::size_t s = 0; s < geom_.size(); ++s)
                if (geom_.mask[s]) f.values[s] -= mean;
        }
        return f;
    }

    GridGeometry geom_, work_;
    Boundary b_;
    int off_i_ = 0, off_j_ = 0;
    long pinned_ = -1;
    std::vector<int> var_of_;
    std::vector<std::size_t> site_of_;
    std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
};

// Zero-boundary GFF on a full rectangle by the 2D sine transform.
class DstGffSampler {
public:
    explicit DstGffSampler(GridGeometry geom) : geom_(std::move(geom)) {
        for (char m : geom_.mask)
            if (!m) throw FieldError("sine-transform sampler needs a full rectangle");
        const int nx = geom_.nx, ny = geom_.ny;
        scale_.resize(geom_.size());
        for (int k = 0; k < nx; ++k)
            for (int l = 0; l < ny; ++l) {
                double lam = 4 - 2 * std::cos(std::numbers::pi * (k + 1) / (nx + 1)) -
                             2 * std::cos(std::numbers::pi * (l + 1) / (ny + 1));
                scale_[geom_.index(k, l)] = std::sqrt(2 * std::numbers::pi / lam) *
                                            std::sqrt(2.0 / (nx + 1)) * std::sqrt(2.0 / (ny + 1)) / 4.0;
            }
        buf_ = fftw_alloc_real(geom_.size());
        plan_ = fftw_plan_r2r_2d(nx, ny, buf_, buf_, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
    }
    ~DstGffSampler() {
        fftw_destroy_plan(plan_);
        fftw_free(buf_);
    }
    DstGffSampler(const DstGffSampler&) = delete;
    DstGffSampler& operator=(const DstGffSampler&) = delete;

    // Not thread-safe: one sampler per worker.
    GridField sample(Philox& g) {
        for (std::size_t s = 0; s < geom_.size(); ++s) buf_[s] = normal01(g) * scale_[s];
        fftw_execute(plan_);
        return {geom_, Boundary::zero, std::vector<double>(buf_, buf_ + geom_.size())};
    }

private:
    GridGeometry geom_;
    std::vector<double> scale_;
    double* buf_;
    fftw_plan plan_;
};

inline GridField sample_dgff(const GridGeometry& geom, Boundary b, Philox& g) { return GffModel(geom, b).sample(g); }

using Stencil = std::vector<std::pair<std::size_t, double>>;

// Arc-length stencil: M equally spaced points on the circle, each credited to
// its nearest lattice site with weight 1/M. With half_ok, points off the mask
// are dropped and the rest renormalized (boundary semicircles).
inline Stencil circle_stencil(const GridGeometry& g, std::complex<double> z, double eps, bool half_ok = false) {
    if (!(eps > 0)) throw FieldError("eps must be positive");
    const int M = std::max(16, int(std::ceil(8 * 2 * std::numbers::pi * eps / g.mesh)));
    std::vector<double> acc;
    std::vector<std::size_t> sites;
    int kept = 0;
    for (int k = 0; k < M; ++k) {
        double th = 2 * std::numbers::pi * (k + 0.5) / M;
        auto [i, j] = g.nearest(z + std::polar(eps, th));
        if (!g.inside(i, j)) {
            if (half_ok) continue;
            throw FieldError("circle exits domain");
        }
        std::size_t s = g.index(i, j);
        auto it = std::find(sites.begin(), sites.end(), s);
        if (it == sites.end()) sites.push_back(s), acc.push_back(1.0);
        else acc[it - sites.begin()] += 1.0;
        ++kept;
    }
    if (kept == 0) throw FieldError("circle exits domain");
    Stencil st;
    for (std::size_t i = 0; i < sites.size(); ++i) st.push_back({sites[i], acc[i] / kept});
    return st;
}

inline double apply_stencil(const Stencil& st, const std::vector<double>& v) {
    double s = 0;
    for (auto [i, w] : st) s += w * v[i];
    return s;
}

inline std::vector<double> stencil_weights(const GridGeometry& g, const Stencil& st) {
    std::vector<double> w(g.size(), 0.0);
    for (auto [i, x] : st) w[i] += x;
    return w;
}

inline double circle_average(const GridField& f, std::complex<double> z, double eps) {
    return apply_stencil(circle_stencil(f.geom, z, eps), f.values);
}

// Per-site masses; sites whose regularizing circle leaves the domain carry none.
struct CellMeasure {
    GridGeometry geom;
    std::vector<double> mass;
    std::vector<char> active;

    double total() const {
        double t = 0;
        for (double m : mass) t += m;
        return t;
    }
    double total_in(double xlo, double xhi, double ylo, double yhi) const {
        double t = 0;
        for (std::size_t s = 0; s < mass.size(); ++s) {
            auto p = geom.point(s);
            if (p.real() >= xlo && p.real() <= xhi && p.imag() >= ylo && p.imag() <= yhi) t += mass[s];
        }
        return t;
    }
};

// Precomputed circle averages for every site of a geometry.
class CircleAverager {
public:
    CircleAverager(const GridGeometry& g, double eps, bool boundary_cells = false) : g_(g), eps_(eps) {
        if (eps < g.mesh) throw FieldError("eps below mesh scale");
        stencils_.resize(g.size());
        active_.assign(g.size(), 0);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                if (!g.inside(i, j)) continue;
                bool edge = !g.inside(i + 1, j) || !g.inside(i - 1, j) || !g.inside(i, j + 1) || !g.inside(i, j - 1);
                if (boundary_cells != edge) continue;
                try {
                    stencils_[g.index(i, j)] = circle_stencil(g, g.point(i, j), eps, boundary_cells);
                    active_[g.index(i, j)] = 1;
                } catch (const FieldError&) {
                }
            }
    }

    const GridGeometry& geometry() const { return g_; }
    double eps() const { return eps_; }
    bool active(std::size_t s) const { return active_[s]; }
    const std::vector<char>& active_mask() const { return active_; }
    const Stencil& stencil(std::size_t s) const { return stencils_[s]; }

    std::vector<double> apply(const std::vector<double>& v) const {
        std::vector<double> out(v.size(), 0.0);
        for (std::size_t s = 0; s < v.size(); ++s)
            if (active_[s]) out[s] = apply_stencil(stencils_[s], v);
        return out;
    }

private:
    GridGeometry g_;
    double eps_;
    std::vector<Stencil> stencils_;
    std::vector<char> active_;
};

inline CellMeasure gmc_area(const GridField& f, const LqgParams& p, const CircleAverager& avg) {
    CellMeasure m{f.geom, std::vector<double>(f.values.size(), 0.0), avg.active_mask()};
    auto he = avg.apply(f.values);
    const double pre = std::pow(avg.eps(), p.gamma * p.gamma / 2) * f.geom.mesh * f.geom.mesh;
    for (std::size_t s = 0; s < he.size(); ++s)
        if (avg.active(s)) m.mass[s] = pre * std::exp(p.gamma * he[s]);
    return m;
}

inline CellMeasure gmc_area(const GridField& f, const LqgParams& p, double eps) {
    return gmc_area(f, p, CircleAverager(f.geom, eps));
}

// Expected cell masses from the covariance oracle (lognormal mean).
inline CellMeasure gmc_area_mean(const GffModel& model, const LqgParams& p, const CircleAverager& avg) {
    const auto& g = model.geometry();
    CellMeasure m{g, std::vector<double>(g.size(), 0.0), avg.active_mask()};
    const double pre = std::pow(avg.eps(), p.gamma * p.gamma / 2) * g.mesh * g.mesh;
    for (std::size_t s = 0; s < g.size(); ++s)
        if (avg.active(s))
            m.mass[s] = pre * std::exp(p.gamma * p.gamma * model.variance(stencil_weights(g, avg.stencil(s))) / 2);
    return m;
}

// Boundary-adjacent sites with semicircle averages; exponent γ/2, cells of length mesh.
inline CellMeasure gmc_boundary(const GridField& f, const LqgParams& p, const CircleAverager& avg) {
    CellMeasure m{f.geom, std::vector<double>(f.values.size(), 0.0), avg.active_mask()};
    auto he = avg.apply(f.values);
    const double pre = std::pow(avg.eps(), p.gamma * p.gamma / 4) * f.geom.mesh;
    for (std::size_t s = 0; s < he.size(); ++s)
        if (avg.active(s)) m.mass[s] = pre * std::exp(p.gamma / 2 * he[s]);
    return m;
}

inline CellMeasure gmc_boundary(const GridField& f, const LqgParams& p, double eps) {
    return gmc_boundary(f, p, CircleAverager(f.geom, eps, true));
}

inline CellMeasure gmc_boundary_mean(const GffModel& model, const LqgParams& p, const CircleAverager& avg) {
    const auto& g = model.geometry();
    CellMeasure m{g, std::vector<double>(g.size(), 0.0), avg.active_mask()};
    const double pre = std::pow(avg.eps(), p.gamma * p.gamma / 4) * g.mesh;
    for (std::size_t s = 0; s < g.size(); ++s)
        if (avg.active(s))
            m.mass[s] = pre * std::exp(p.gamma * p.gamma * model.variance(stencil_weights(g, avg.stencil(s))) / 8);
    return m;
}

struct Insertion {
    std::complex<double> location;
    double charge;
};

// base + profile + Σ α_i Cov(·, z_i) + c, the profile being -2Q log max(|z|,1)
// when requested (whole-plane normalization).
inline GridField liouville_field(const GffModel& model, const GridField& base, const LqgParams& p,
                                 const std::vector<Insertion>& ins, double c, bool whole_plane_profile = false) {
    const auto& g = base.geom;
    GridField out = base;
    std::vector<std::size_t> used;
    for (auto& in : ins) {
        auto [i, j] = g.nearest(in.location);
        if (!g.inside(i, j)) throw FieldError("insertion outside domain");
        std::size_t s = g.index(i, j);
        if (std::find(used.begin(), used.end(), s) != used.end()) throw FieldError("insertion collision");
        used.push_back(s);
        auto col = model.kernel_column(s);
        for (std::size_t k = 0; k < g.size(); ++k)
            if (g.mask[k]) out.values[k] += in.charge * col[k];
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!g.mask[k]) continue;
        if (whole_plane_profile) out.values[k] -= 2 * p.Q() * std::log(std::max(std::abs(g.point(k)), 1.0));
        out.values[k] += c;
    }
    return out;
}

inline bool seiberg_check(const std::vector<double>& charges, const LqgParams& p) {
    double sum = 0;
    for (double a : charges) {
        if (!(a < p.Q())) return false;
        sum += a;
    }
    return sum > 2 * p.Q();
}

struct AffineMap {
    double r = 1.0;
    std::complex<double> b{0, 0};
};

// z -> e^{iθ}(z - a)/(1 - conj(a) z), |a| < 1
struct DiskMobius {
    std::complex<double> a{0, 0};
    double theta = 0.0;

    std::complex<double> operator()(std::complex<double> z) const {
        return std::polar(1.0, theta) * (z - a) / (1.0 - std::conj(a) * z);
    }
    std::complex<double> inverse(std::complex<double> w) const {
        std::complex<double> u = w * std::polar(1.0, -theta);
        return (u + a) / (1.0 + std::conj(a) * u);
    }
    double abs_derivative(std::complex<double> z) const {
        return (1.0 - std::norm(a)) / std::norm(1.0 - std::conj(a) * z);
    }
};

using ConformalMap = std::variant<AffineMap, DiskMobius>;

// h̃ = h∘φ^{-1} - Q log|φ'∘φ^{-1}| on φ(D).
inline GridField coordinate_change(const GridField& f, const ConformalMap& phi, const LqgParams& p) {
    if (auto* af = std::get_if<AffineMap>(&phi)) {
        if (!(af->r > 0)) throw FieldError("unsupported map: affine scale must be positive");
        GridField out = f;
        out.geom.mesh = f.geom.mesh * af->r;
        out.geom.x0 = f.geom.x0 * af->r + af->b.real();
        out.geom.y0 = f.geom.y0 * af->r + af->b.imag();
        const double shift = p.Q() * std::log(af->r);
        for (std::size_t s = 0; s < f.values.size(); ++s)
            if (f.geom.mask[s]) out.values[s] -= shift;
        return out;
    }
    const auto& mob = std::get<DiskMobius>(phi);
    if (std::abs(mob.a) >= 1) throw FieldError("unsupported map: |a| >= 1");
    GridField out = f;
    for (int i = 0; i < f.geom.nx; ++i)
        for (int j = 0; j < f.geom.ny; ++j) {
            if (!f.geom.inside(i, j)) continue;
            auto z = mob.inverse(f.geom.point(i, j));
            auto [a, b] = f.geom.nearest(z);
            double v = f.geom.inside(a, b) ? f.values[f.geom.index(a, b)] : 0.0;
            out.values[f.geom.index(i, j)] = v - p.Q() * std::log(mob.abs_derivative(z));
        }
    return out;
}

}  // namespace lqglab
