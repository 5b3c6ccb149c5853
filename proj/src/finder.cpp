#include "chemoproof/finder.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "chemoproof/cosine.hpp"

namespace chemoproof {

FloatSeqPair FloatSeqPair::homogeneous(const Geometry& g, int N, double u0, double v0) {
    FloatSeqPair s{g, std::vector<double>(static_cast<std::size_t>(N + 1), 0.0),
                   std::vector<double>(static_cast<std::size_t>(N + 1), 0.0)};
    s.u[0] = u0;
    s.v[0] = v0;
    return s;
}

FloatSeqPair FloatSeqPair::from(const SeqPair& U) {
    const int N = std::max(U.u.degree(), U.v.degree());
    FloatSeqPair s{U.u.geom, U.u.resized(N).mids(), U.v.resized(N).mids()};
    return s;
}

SeqPair FloatSeqPair::to_seqpair() const {
    return {GeoSeq::from_doubles(geom, u), GeoSeq::from_doubles(geom, v)};
}

namespace {

double norm_d(const std::vector<double>& c, double nu) {
    double s = 0.0;
    double w = 2.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
        s += (n == 0 ? 1.0 : w) * std::fabs(c[n]);
        if (n > 0) w *= nu;
    }
    return s;
}

// (a*b)_n for n = 0..max_degree
std::vector<double> conv_d(const std::vector<double>& a, const std::vector<double>& b, int max_degree) {
    const int na = static_cast<int>(a.size()) - 1;
    const int nb = static_cast<int>(b.size()) - 1;
    std::vector<double> c(static_cast<std::size_t>(max_degree + 1), 0.0);
    for (int n = 0; n <= max_degree; ++n) {
        double s = 0.0;
        for (int k = -na; k <= na; ++k) {
            const int m = std::abs(n - k);
            if (m <= nb) s += a[static_cast<std::size_t>(std::abs(k))] * b[static_cast<std::size_t>(m)];
        }
        c[static_cast<std::size_t>(n)] = s;
    }
    return c;
}

double at(const std::vector<double>& w, int n) {
    return n >= 0 && n < static_cast<int>(w.size()) ? w[static_cast<std::size_t>(n)] : 0.0;
}

double mult_entry(const std::vector<double>& w, int n, int k) {
    return k == 0 ? at(w, n) : at(w, std::abs(n - k)) + at(w, n + k);
}

double mu(const Geometry& g, int n) {
    const double k = n * std::numbers::pi / (g.b - g.a);
    return k * k;
}

int sample_count(int N) { return std::max(4 * N + 4, 64); }

}  // namespace

double FloatSeqPair::norm() const { return norm_d(u, geom.nu) + norm_d(v, geom.nu); }

double distance(const FloatSeqPair& x, const FloatSeqPair& y) {
    const std::size_t n = std::max(x.u.size(), y.u.size());
    std::vector<double> du(n, 0.0), dv(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        du[i] = (i < x.u.size() ? x.u[i] : 0.0) - (i < y.u.size() ? y.u[i] : 0.0);
        dv[i] = (i < x.v.size() ? x.v[i] : 0.0) - (i < y.v.size() ? y.v[i] : 0.0);
    }
    return norm_d(du, x.geom.nu) + norm_d(dv, x.geom.nu);
}

GammaCoefficients gamma_coefficients(const GammaSpec& spec, const std::vector<double>& v, int degree, int points) {
    const CosineGrid grid(points);
    const std::vector<double> vx = grid.synthesize(v);
    std::vector<double> g(vx.size()), gp(vx.size());
    for (std::size_t j = 0; j < vx.size(); ++j) {
        const GammaScalar s = gamma_scalar(spec, vx[j]);
        g[j] = s.g0;
        gp[j] = s.g1;
    }
    return {grid.analyze(g, degree), grid.analyze(gp, degree)};
}

namespace {

struct Residual {
    std::vector<double> f1, f2;  // degree `out`
};

Residual residual_to(const FloatSeqPair& U, const Params& p, const std::vector<double>& g, int out) {
    const std::vector<double> gu = conv_d(g, U.u, out);
    const std::vector<double> uu = conv_d(U.u, U.u, out);
    Residual r{std::vector<double>(static_cast<std::size_t>(out + 1)), std::vector<double>(static_cast<std::size_t>(out + 1))};
    for (int n = 0; n <= out; ++n) {
        const auto i = static_cast<std::size_t>(n);
        r.f1[i] = -mu(U.geom, n) * gu[i] + p.sigma * (at(U.u, n) - uu[i]);
        r.f2[i] = -p.d * mu(U.geom, n) * at(U.v, n) + at(U.u, n) - at(U.v, n);
    }
    return r;
}

double galerkin_norm(const std::vector<double>& r, int N, double nu) {
    const std::vector<double> a(r.begin(), r.begin() + N + 1);
    const std::vector<double> b(r.begin() + N + 1, r.end());
    return norm_d(a, nu) + norm_d(b, nu);
}

}  // namespace

std::vector<double> galerkin_residual(const FloatSeqPair& U, const Params& p) {
    const int N = U.degree();
    const GammaCoefficients gc = gamma_coefficients(p.gamma, U.v, 2 * N, sample_count(N));
    const Residual r = residual_to(U, p, gc.g, N);
    std::vector<double> out(r.f1);
    out.insert(out.end(), r.f2.begin(), r.f2.end());
    return out;
}

double residual_norm(const FloatSeqPair& U, const Params& p) {
    const int N = U.degree();
    const GammaCoefficients gc = gamma_coefficients(p.gamma, U.v, 2 * N, sample_count(N));
    const Residual r = residual_to(U, p, gc.g, 2 * N);
    return norm_d(r.f1, U.geom.nu) + norm_d(r.f2, U.geom.nu);
}

namespace {

Eigen::MatrixXd galerkin_jacobian(const FloatSeqPair& U, const Params& p, const GammaCoefficients& gc) {
    const int N = U.degree();
    const int n1 = N + 1;
    const std::vector<double> gpu = conv_d(gc.gp, U.u, 2 * N);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n1, 2 * n1);
    for (int n = 0; n <= N; ++n) {
        const double m = mu(U.geom, n);
        for (int k = 0; k <= N; ++k) {
            J(n, k) = -m * mult_entry(gc.g, n, k) + p.sigma * ((n == k ? 1.0 : 0.0) - 2.0 * mult_entry(U.u, n, k));
            J(n, n1 + k) = -m * mult_entry(gpu, n, k);
        }
        J(n1 + n, n) = 1.0;
        J(n1 + n, n1 + n) = -(p.d * m + 1.0);
    }
    return J;
}

}  // namespace

NewtonResult newton_refine(const FloatSeqPair& start, const Params& p, double tol, int maxit) {
    NewtonResult res;
    res.state = start;
    const int N = start.degree();
    const int n1 = N + 1;
    const double nu = start.geom.nu;
    if (start.v.size() != start.u.size()) {
        res.message = "u and v have different degrees";
        return res;
    }

    auto evaluate = [&](const FloatSeqPair& U, GammaCoefficients& gc) {
        gc = gamma_coefficients(p.gamma, U.v, 2 * N, sample_count(N));
        const Residual r = residual_to(U, p, gc.g, N);
        std::vector<double> out(r.f1);
        out.insert(out.end(), r.f2.begin(), r.f2.end());
        return out;
    };

    GammaCoefficients gc;
    std::vector<double> F = evaluate(res.state, gc);
    double norm = galerkin_norm(F, N, nu);
    for (int it = 0;; ++it) {
        res.history.push_back(norm);
        res.residual = norm;
        res.iterations = it;
        if (!std::isfinite(norm)) {
            res.message = "diverged (non-finite residual)";
            return res;
        }
        if (norm < tol) {
            res.converged = true;
            res.message = "converged";
            return res;
        }
        if (it >= maxit) {
            res.message = "no convergence within the iteration limit";
            return res;
        }
        const Eigen::MatrixXd J = galerkin_jacobian(res.state, p, gc);
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
        if (!(lu.rcond() > 1e-14)) {
            res.message = "singular Jacobian";
            return res;
        }
        const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(F.data(), static_cast<Eigen::Index>(F.size()));
        const Eigen::VectorXd step = lu.solve(rhs);

        // Full step unless it increases the residual; then halve a few times.
        double lambda = 1.0;
        FloatSeqPair trial;
        std::vector<double> Ft;
        double nt = 0.0;
        GammaCoefficients gt;
        for (int back = 0; back < 12; ++back) {
            trial = res.state;
            for (int k = 0; k < n1; ++k) {
                trial.u[static_cast<std::size_t>(k)] -= lambda * step(k);
                trial.v[static_cast<std::size_t>(k)] -= lambda * step(n1 + k);
            }
            Ft = evaluate(trial, gt);
            nt = galerkin_norm(Ft, N, nu);
            if (std::isfinite(nt) && (nt < norm || nt < tol)) break;
            lambda *= 0.5;
        }
        if (!(std::isfinite(nt) && nt < norm)) {
            // no decrease at all: we sit at the floating-point floor or diverged
            res.message = nt < tol ? "converged" : "stagnated";
            if (nt < tol) {
                res.state = trial;
                res.residual = nt;
                res.converged = true;
                res.history.push_back(nt);
                res.iterations = it + 1;
            }
            return res;
        }
        res.state = std::move(trial);
        F = std::move(Ft);
        gc = std::move(gt);
        norm = nt;
    }
}

namespace {

// The pseudo-transient phase of relax_then_refine at the degree of `start`.
FloatSeqPair pseudo_transient(const FloatSeqPair& start, const Params& p, const RelaxOptions& ro) {
    const int N = start.degree();
    const int n1 = N + 1;
    const double nu = start.geom.nu;
    FloatSeqPair U = start;
    GammaCoefficients gc = gamma_coefficients(p.gamma, U.v, 2 * N, sample_count(N));
    Residual r = residual_to(U, p, gc.g, N);
    std::vector<double> F(r.f1);
    F.insert(F.end(), r.f2.begin(), r.f2.end());
    double norm = galerkin_norm(F, N, nu);
    // Implicit Euler damps a mode with growth rate lambda once lambda dt > 2, so
    // the time step stays below 1 / (2 lambda_max) of the start until the
    // residual has fallen well below its peak; otherwise the iteration is just
    // Newton and falls back to the unstable homogeneous state.
    double cap = ro.dt_max;
    {
        const Eigen::MatrixXd J0 = galerkin_jacobian(U, p, gc);
        const double lmax = Eigen::EigenSolver<Eigen::MatrixXd>(J0, false).eigenvalues().real().maxCoeff();
        if (lmax > 0.0) cap = std::min(cap, 0.5 / lmax);
    }
    double peak = norm;
    double dt = std::min(ro.dt0, cap);
    for (int step = 0; step < ro.max_steps && std::isfinite(norm) && norm > ro.switch_tol; ++step) {
        Eigen::MatrixXd M = -galerkin_jacobian(U, p, gc);
        M.diagonal().array() += 1.0 / dt;
        const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(F.data(), static_cast<Eigen::Index>(F.size()));
        const Eigen::VectorXd du = Eigen::PartialPivLU<Eigen::MatrixXd>(M).solve(rhs);
        FloatSeqPair trial = U;
        for (int k = 0; k < n1; ++k) {
            trial.u[static_cast<std::size_t>(k)] += du(k);
            trial.v[static_cast<std::size_t>(k)] += du(n1 + k);
        }
        const double step_size = distance(trial, U);
        GammaCoefficients gt = gamma_coefficients(p.gamma, trial.v, 2 * N, sample_count(N));
        Residual rt = residual_to(trial, p, gt.g, N);
        std::vector<double> Ft(rt.f1);
        Ft.insert(Ft.end(), rt.f2.begin(), rt.f2.end());
        const double next = galerkin_norm(Ft, N, nu);
        // too large a time step: the implicit step overshoots, retry smaller
        if (!std::isfinite(next) || next > 2.0 * norm || step_size > 0.5 * U.norm()) {
            dt *= 0.25;
            continue;
        }
        U = std::move(trial);
        gc = std::move(gt);
        F = std::move(Ft);
        peak = std::max(peak, next);
        const double limit = next < 1e-3 * peak ? ro.dt_max : cap;
        dt = std::min(limit, dt * std::clamp(norm / next, 0.5, 2.0));
        norm = next;
    }
    return U;
}

FloatSeqPair resized(const FloatSeqPair& U, int N) {
    FloatSeqPair out = U;
    out.u.resize(static_cast<std::size_t>(N + 1), 0.0);
    out.v.resize(static_cast<std::size_t>(N + 1), 0.0);
    return out;
}

}  // namespace

NewtonResult relax_then_refine(const FloatSeqPair& start, const Params& p, double tol, int maxit,
                               const RelaxOptions& ro) {
    const int N = start.degree();
    if (ro.coarse_degree > 0 && N > ro.coarse_degree) {
        const FloatSeqPair coarse = pseudo_transient(resized(start, ro.coarse_degree), p, ro);
        return newton_refine(resized(coarse, N), p, tol, maxit);
    }
    return newton_refine(pseudo_transient(start, p, ro), p, tol, maxit);
}

InstabilityResult instability_test(const Params& p, int max_mode) {
    const GammaScalar g = gamma_scalar(p.gamma, 1.0);
    InstabilityResult r;
    const double sd = p.sigma * p.d;
    r.trace = sd + g.g0 + g.g1;
    r.discriminant = r.trace * r.trace - 4.0 * sd * g.g0;
    r.unstable = r.trace < 0.0 && r.discriminant > 0.0;
    for (int n = 1; n <= max_mode; ++n) {
        const double m = mu(p.geom, n);
        // determinant of the mode-n linearization at (1, 1)
        const double det = p.d * g.g0 * m * m + r.trace * m + p.sigma;
        if (det < 0.0) r.modes.push_back(n);
    }
    return r;
}

double amplitude(const FloatSeqPair& U, int samples) {
    double lo = INFINITY, hi = -INFINITY;
    for (int i = 0; i < samples; ++i) {
        const double t = samples > 1 ? static_cast<double>(i) / (samples - 1) : 0.0;
        const double c1 = std::cos(std::numbers::pi * t);
        double cm = 1.0, c = c1, val = U.u[0];
        for (std::size_t n = 1; n < U.u.size(); ++n) {
            val += 2.0 * U.u[n] * c;
            const double next = 2.0 * c1 * c - cm;
            cm = c;
            c = next;
        }
        lo = std::min(lo, val);
        hi = std::max(hi, val);
    }
    return hi - lo;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, n));
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

namespace {

BranchPoint make_point(double sigma, const NewtonResult& r) {
    return {sigma, r.state, amplitude(r.state), r.residual, r.converged};
}

void add_unique(std::vector<BranchPoint>& pts, BranchPoint bp, double dedup) {
    for (const auto& q : pts) {
        if (q.converged == bp.converged && distance(q.state, bp.state) < dedup) return;
    }
    pts.push_back(std::move(bp));
}

}  // namespace

std::vector<BranchPoint> sweep_diagram(const Params& p, const std::vector<double>& sigma_grid, const SweepOptions& opt) {
    const int G = static_cast<int>(sigma_grid.size());
    std::vector<std::vector<BranchPoint>> at_sigma(static_cast<std::size_t>(G));

    // Fresh seeds: independent per grid point.
    parallel_for(G, opt.threads, [&](int i) {
        Params q = p;
        q.sigma = sigma_grid[static_cast<std::size_t>(i)];
        auto& pts = at_sigma[static_cast<std::size_t>(i)];
        const FloatSeqPair one = FloatSeqPair::homogeneous(p.geom, opt.N);
        pts.push_back({q.sigma, one, 0.0, 0.0, true});
        // a relaxation seeded in a stable mode only decays back to (1, 1)
        std::vector<int> growing;
        if (opt.relax && !opt.modes.empty()) {
            growing = instability_test(q, *std::max_element(opt.modes.begin(), opt.modes.end())).modes;
        }
        for (int mode : opt.modes) {
            if (mode > opt.N) continue;
            for (double amp : opt.seed_amplitudes) {
                // v follows u through -d Lap v + v = u
                FloatSeqPair s = one;
                s.u[static_cast<std::size_t>(mode)] += 0.5 * amp;
                s.v[static_cast<std::size_t>(mode)] += 0.5 * amp / (1.0 + q.d * mu(p.geom, mode));
                const NewtonResult r = newton_refine(s, q, opt.tol, opt.maxit);
                if (r.converged) add_unique(pts, make_point(q.sigma, r), opt.dedup);
                if (std::find(growing.begin(), growing.end(), mode) == growing.end()) continue;
                FloatSeqPair t = one;
                t.u[static_cast<std::size_t>(mode)] += 0.5 * amp;
                t.v[static_cast<std::size_t>(mode)] += 0.5 * amp;
                const NewtonResult rr = relax_then_refine(t, q, opt.tol, opt.maxit);
                if (rr.converged) add_unique(pts, make_point(q.sigma, rr), opt.dedup);
            }
        }
    });

    // Natural continuation, forward then backward, from every state found.
    auto continue_from = [&](int from, int to) {
        Params q = p;
        q.sigma = sigma_grid[static_cast<std::size_t>(to)];
        const auto sources = at_sigma[static_cast<std::size_t>(from)];
        for (const auto& src : sources) {
            if (!src.converged || src.amplitude == 0.0) continue;
            const NewtonResult r = newton_refine(src.state, q, opt.tol, opt.maxit);
            add_unique(at_sigma[static_cast<std::size_t>(to)], make_point(q.sigma, r), opt.dedup);
        }
    };
    for (int i = 1; i < G; ++i) continue_from(i - 1, i);
    for (int i = G - 2; i >= 0; --i) continue_from(i + 1, i);

    std::vector<BranchPoint> out;
    for (auto& pts : at_sigma) {
        std::stable_sort(pts.begin(), pts.end(), [](const BranchPoint& a, const BranchPoint& b) {
            if (a.converged != b.converged) return a.converged;
            return a.amplitude < b.amplitude;
        });
        for (auto& bp : pts) out.push_back(std::move(bp));
    }
    return out;
}

}  // namespace chemoproof
