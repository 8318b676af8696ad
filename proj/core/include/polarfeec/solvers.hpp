#pragma once

#include <array>
#include <optional>

#include "polarfeec/assembly.hpp"
#include "polarfeec/conforming.hpp"

namespace polarfeec {

/// Homogeneous Dirichlet realization on the outer circle: zeroes the last
/// coefficient ring (level 0) or the tangential trace ring of the theta block
/// (level 1). Open-knot splines are interpolatory at s = L, so this is the
/// standard strong enforcement.
SparseOperator boundary_restriction(const TensorDeRham& sp, int level);

/// Conforming projector matrix, optionally composed with the Dirichlet ring.
SparseOperator projector_matrix(const TensorDeRham& sp, const ConformingProjector& P, int level,
                                bool with_boundary);

struct PoissonSystem {
    SparseOperator G;    // discrete gradient
    SparseOperator P0;   // boundary-composed conforming projection, level 0
    SparseOperator M0;
    SparseOperator M1;
    SparseOperator A;    // (G P0)^T M1 G P0 + alpha (I-P0)^T M0 (I-P0)
    double alpha = 1.0;
};

PoissonSystem build_poisson_system(const TensorDeRham& sp, const QuadratureGrid& grid, Kind kind,
                                   MapVariant variant, double alpha, int n_threads = 1);

struct PoissonResult {
    FieldCoeffs phi;
    CGResult cg;
    double conformity_defect = 0.0;  // ||(I-P0) phi|| / ||phi|| in coefficient norm
};

/// CG solve of the stabilized broken formulation; rhs enters as the moment
/// vector <f, T^0_mu> (the system applies P0^T to it).
PoissonResult solve_poisson(const PoissonSystem& sys, std::span<const double> f_moments,
                            double tol = 1e-12, int max_iter = 200000, bool jacobi = true);

struct MaxwellState {
    FieldCoeffs E;  // level 1
    FieldCoeffs B;  // level 2
    double t = 0.0;
};

struct MaxwellSystem {
    SparseOperator P1;    // boundary-composed conforming projection, level 1
    SparseOperator P2;
    SparseOperator CP1;   // C P1
    SparseOperator Mt1;   // regularized masses
    SparseOperator Mt2;
    SparseOperator CP1T_Mt2;  // (C P1)^T Mt2, precomposed for the E update
    std::vector<double> Mt1_diag;
    double cg_tol = 1e-12;
    int max_iter = 20000;
};

MaxwellSystem build_maxwell_system(const TensorDeRham& sp, const QuadratureGrid& grid, Kind kind,
                                   MapVariant variant, int n_threads = 1);

/// One leap-frog step of the discrete Faraday/Ampere system: half-step B,
/// mass-solve for E, half-step B. `j_moments`, when present, holds the
/// time-averaged current moments <J, T^1_mu> over the step.
void maxwell_leapfrog_step(MaxwellState& state, const MaxwellSystem& sys, double dt,
                           const std::vector<double>* j_moments = nullptr);

/// Triple-jump composition of leap-frog steps with the fourth-order weights
/// w1, w0, w1 where w1 = 1/(2-2^(1/3)) and w0 = 1-2*w1.
void suzuki_yoshida4_step(MaxwellState& state, const MaxwellSystem& sys, double dt,
                          const std::vector<double>* j_moments = nullptr);
std::array<double, 3> suzuki_yoshida_weights();

/// (1/2)(E^T Mt1 E + B^T Mt2 B), conserved up to bounded oscillation by the
/// leap-frog scheme when J = 0.
double maxwell_energy(const MaxwellState& state, const MaxwellSystem& sys);

/// Smallest positive physical edge of the mapped break-point grid; drives the
/// default time step dt = 0.5 * h_min.
double min_physical_edge(const TensorDeRham& sp, const Mapping& map);

// --- Bessel machinery for the time-harmonic disk solution ---

double bessel_J(int n, double x);
double bessel_J_prime(int n, double x);

/// Mode (n,m) of the unit disk: k = omega = m-th positive root of J_n'.
struct BesselMode {
    int n = 0;
    int m = 1;
    double k = 0.0;
};

BesselMode make_bessel_mode(int n, int m);

/// Real-part Bessel-Fourier solution of Maxwell on the unit disk; E is
/// regular at the origin and satisfies the metallic condition E_theta(1) = 0.
Vec2 bessel_E(const BesselMode& mode, double t, Vec2 x);
double bessel_B(const BesselMode& mode, double t, Vec2 x);

/// Divergence-free Gaussian pulse used by the wave demo.
Vec2 gaussian_pulse_E(double sigma, Vec2 x);
double gaussian_pulse_curlE(double sigma, Vec2 x);

struct MaxwellInitialData {
    FieldCoeffs E;
    FieldCoeffs B;
};

/// E^0 = Pi^1_Z (y,-x) exp(-|x|^2/2 sigma^2), B^0 = Pi^2_Z curl E^0.
MaxwellInitialData gaussian_pulse_initial(double sigma, const GeometricProjector& proj,
                                          const ConformingProjector& P, const Mapping& map);

}  // namespace polarfeec
