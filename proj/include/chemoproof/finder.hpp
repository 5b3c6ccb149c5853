// Plain floating-point numerics that produce candidates for certification:
// Galerkin Newton in cosine coefficients, the linear instability test of the
// homogeneous state (1, 1), and a discrete bifurcation sweep in sigma.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chemoproof/seqspace.hpp"
#include "chemoproof/system.hpp"

namespace chemoproof {

struct FloatSeqPair {
    Geometry geom;
    std::vector<double> u;  // u[0..N]
    std::vector<double> v;

    static FloatSeqPair homogeneous(const Geometry& g, int N, double u0 = 1.0, double v0 = 1.0);
    static FloatSeqPair from(const SeqPair& U);
    [[nodiscard]] int degree() const { return static_cast<int>(u.size()) - 1; }
    [[nodiscard]] SeqPair to_seqpair() const;
    // ||u|| + ||v|| in l1_nu (float level)
    [[nodiscard]] double norm() const;
};

double distance(const FloatSeqPair& x, const FloatSeqPair& y);

// Coefficients 0..degree of gamma(v(x)), gamma'(v(x)) from `points` samples.
struct GammaCoefficients {
    std::vector<double> g;
    std::vector<double> gp;
};
GammaCoefficients gamma_coefficients(const GammaSpec& spec, const std::vector<double>& v, int degree, int points);

// Galerkin residual: coefficients 0..N of both components of F.
std::vector<double> galerkin_residual(const FloatSeqPair& U, const Params& p);
// ||F(U)|| over the full degree-2N residual, float level.
double residual_norm(const FloatSeqPair& U, const Params& p);

struct NewtonResult {
    FloatSeqPair state;
    double residual = 0.0;  // ||F|| of the Galerkin part, l1_nu
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;  // residual before each step, then the final one
    std::string message;
};

NewtonResult newton_refine(const FloatSeqPair& start, const Params& p, double tol = 1e-12, int maxit = 50);

// Pseudo-transient continuation: implicit Euler steps (I/dt - DF) dU = F with
// dt grown by the residual ratio, i.e. time integration of the parabolic
// system that ends in Newton steps. Used to leave the homogeneous state from
// small seeds; stops when the residual drops below `switch_tol` (and then
// finishes with newton_refine) or after `max_steps`. Steps that blow up the
// residual are retried with a quarter of the time step.
struct RelaxOptions {
    double dt0 = 1.0;
    double dt_max = 1e12;
    int max_steps = 2000;
    double switch_tol = 1e-8;
    int coarse_degree = 64;  // relax at this degree when the start is longer, then pad for Newton
};
NewtonResult relax_then_refine(const FloatSeqPair& start, const Params& p, double tol = 1e-12, int maxit = 50,
                               const RelaxOptions& ro = {});

struct InstabilityResult {
    bool unstable = false;
    double trace = 0.0;         // sigma d + gamma(1) + gamma'(1)
    double discriminant = 0.0;  // trace^2 - 4 sigma d gamma(1)
    std::vector<int> modes;     // cosine modes n with a growing direction
};
// `max_mode` bounds the modes checked; 0 skips the per-mode list.
InstabilityResult instability_test(const Params& p, int max_mode = 0);

struct BranchPoint {
    double sigma = 0.0;
    FloatSeqPair state;
    double amplitude = 0.0;  // max u - min u on a uniform sample
    double residual = 0.0;
    bool converged = false;
};

double amplitude(const FloatSeqPair& U, int samples = 1025);

struct SweepOptions {
    int N = 100;
    double tol = 1e-12;
    int maxit = 50;
    std::vector<int> modes{1, 2, 3, 4, 5, 6};
    std::vector<double> seed_amplitudes{0.1, 0.3};
    double dedup = 1e-6;
    bool relax = true;  // also relax_then_refine (u and v perturbed alike) in linearly unstable modes
    int threads = 1;
};

// Sorted by sigma (grid order), then amplitude. Deterministic for any thread count.
std::vector<BranchPoint> sweep_diagram(const Params& p, const std::vector<double>& sigma_grid,
                                       const SweepOptions& opt = {});

// Runs body(i) for i in [0, n) on up to `threads` threads.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace chemoproof
