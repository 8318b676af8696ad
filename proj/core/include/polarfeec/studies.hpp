#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "polarfeec/solvers.hpp"

namespace polarfeec {

/// One convergence or verification run: grids, degree, projection kind and
/// solver knobs. N_theta = ntheta_factor * N_s per grid.
struct RunConfig {
    std::string problem = "poisson";  // poisson | maxwell-bessel | maxwell-wave | verify
    int degree = 2;
    std::vector<int> ns_list = {8, 16, 32, 64};
    int ntheta_factor = 2;
    double pole_shift = 0.2;  // D, the pole offset of the disk mapping
    Kind kind = Kind::U;      // c1; use Kind::V for the c0 scheme
    double alpha = 1.0;
    double cg_tol = 1e-12;
    double dt = 0.0;  // <= 0 selects 0.5 * h_min
    int threads = 1;
    std::string out_dir;        // empty: no files written
    std::string mapping_file;   // verify: load this control-point file instead

    // Maxwell settings
    int bessel_n = 3;
    int bessel_m = 2;
    double final_time = 0.1;
    double sigma = 0.1;
    std::vector<double> snapshot_times = {2.5, 5.0, 7.5};
    int raster = 256;
};

struct PoissonRow {
    int Ns = 0;
    int dofs = 0;
    double l2_err = 0, h1_err = 0;
    double l2_rate = 0, h1_rate = 0;  // vs the previous grid; NaN on the first row
    int cg_iters = 0;
    double seconds = 0;
};

struct PoissonStudy {
    std::vector<PoissonRow> rows;
    double final_l2_rate() const;
    double final_h1_rate() const;
};

PoissonStudy run_poisson_study(const RunConfig& cfg, std::ostream* log = nullptr);

struct MaxwellRow {
    int Ns = 0;
    int dofs = 0;
    double e_err = 0, b_err = 0;
    double e_rate = 0, b_rate = 0;
    int steps = 0;
    double seconds = 0;
};

struct MaxwellStudy {
    std::vector<MaxwellRow> rows;
    double final_e_rate() const;
    double final_b_rate() const;
};

MaxwellStudy run_maxwell_bessel_study(const RunConfig& cfg, std::ostream* log = nullptr);

struct WaveSnapshot {
    double time = 0;
    std::string file;        // written raster, empty when out_dir is unset
    double pole_roughness = 0;  // max second difference of B near the pole
};

struct WaveDemo {
    int Ns = 0;
    std::vector<WaveSnapshot> snapshots;
    bool coarse_warning = false;  // spurious pole oscillations expected
};

std::vector<WaveDemo> run_wave_demo(const RunConfig& cfg, std::ostream* log = nullptr);

enum class VerifyStatus { pass, fail, skipped };

struct VerifyItem {
    std::string name;
    VerifyStatus status = VerifyStatus::pass;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyItem> items;
    bool all_ok() const;
};

/// Runs the per-module invariant suites at the configured sizes; trigonometry
/// dependent checks are skipped when 4 does not divide n_theta.
VerifyReport run_verify(const RunConfig& cfg, std::ostream* log = nullptr);

void write_poisson_csv(std::ostream& os, const PoissonStudy& study);
void write_maxwell_csv(std::ostream& os, const MaxwellStudy& study);
void write_verify_report(std::ostream& os, const VerifyReport& report);

}  // namespace polarfeec
