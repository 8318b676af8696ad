#include "polarfeec/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace polarfeec {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.11e", v);  // 12 significant digits
    return buf;
}

// manufactured Poisson solution on the unit disk, zero on the boundary
double poisson_phi(Vec2 x)
{
    return std::sin(7.0 * M_PI * (1.0 - x.x * x.x - x.y * x.y) / 2.0);
}

double poisson_source(Vec2 x)
{
    const double r2 = x.x * x.x + x.y * x.y;
    const double g = 7.0 * M_PI * (1.0 - r2) / 2.0;
    return 49.0 * M_PI * M_PI * r2 * std::sin(g) + 14.0 * M_PI * std::cos(g);
}

double rate_of(double coarse, double fine)
{
    return std::log2(coarse / fine);
}

}  // namespace

double PoissonStudy::final_l2_rate() const
{
    return rows.size() >= 2 ? rows.back().l2_rate : std::nan("");
}

double PoissonStudy::final_h1_rate() const
{
    return rows.size() >= 2 ? rows.back().h1_rate : std::nan("");
}

double MaxwellStudy::final_e_rate() const
{
    return rows.size() >= 2 ? rows.back().e_rate : std::nan("");
}

double MaxwellStudy::final_b_rate() const
{
    return rows.size() >= 2 ? rows.back().b_rate : std::nan("");
}

PoissonStudy run_poisson_study(const RunConfig& cfg, std::ostream* log)
{
    PoissonStudy study;
    const MapVariant variant = MapVariant::spline;

    for (int Ns : cfg.ns_list) {
        const auto t0 = std::chrono::steady_clock::now();
        const int Ntheta = cfg.ntheta_factor * Ns;
        const PolarMapping map = build_shifted_disk_map(cfg.degree, Ns, Ntheta, cfg.pole_shift);
        const TensorDeRham& sp = map.space();
        const QuadratureGrid grid = QuadratureGrid::build(sp, map);

        const PoissonSystem sys =
            build_poisson_system(sp, grid, cfg.kind, variant, cfg.alpha, cfg.threads);
        const std::vector<double> f_mom = source_moments0(sp, grid, poisson_source);
        const PoissonResult res = solve_poisson(sys, f_mom, cfg.cg_tol);

        const GeometricProjector proj(sp);
        const FieldCoeffs ref = proj.project_polar(0, map, poisson_phi);

        PoissonRow row;
        row.Ns = Ns;
        row.dofs = sp.dim0;
        row.l2_err = l2_error(0, sp, res.phi.data, ref.data, grid);
        row.h1_err = h1_error(sp, res.phi.data, ref.data, grid, sys.G);
        row.cg_iters = res.cg.iterations;
        if (!study.rows.empty()) {
            row.l2_rate = rate_of(study.rows.back().l2_err, row.l2_err);
            row.h1_rate = rate_of(study.rows.back().h1_err, row.h1_err);
        } else {
            row.l2_rate = row.h1_rate = std::nan("");
        }
        row.seconds = seconds_since(t0);
        study.rows.push_back(row);

        if (log)
            *log << "poisson p=" << cfg.degree << " Ns=" << Ns << " L2=" << sci(row.l2_err)
                 << " H1=" << sci(row.h1_err) << " cg=" << row.cg_iters
                 << " defect=" << sci(res.conformity_defect) << "\n";
    }

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream csv(cfg.out_dir + "/results.csv");
        write_poisson_csv(csv, study);
    }
    return study;
}

MaxwellStudy run_maxwell_bessel_study(const RunConfig& cfg, std::ostream* log)
{
    MaxwellStudy study;
    const MapVariant variant = MapVariant::spline;
    const BesselMode mode = make_bessel_mode(cfg.bessel_n, cfg.bessel_m);
    const double T = cfg.final_time;

    for (int Ns : cfg.ns_list) {
        const auto t0 = std::chrono::steady_clock::now();
        const int Ntheta = cfg.ntheta_factor * Ns;
        const PolarMapping map = build_shifted_disk_map(cfg.degree, Ns, Ntheta, cfg.pole_shift);
        const TensorDeRham& sp = map.space();
        const QuadratureGrid grid = QuadratureGrid::build(sp, map);

        MaxwellSystem sys = build_maxwell_system(sp, grid, cfg.kind, variant, cfg.threads);
        sys.cg_tol = cfg.cg_tol;
        const GeometricProjector proj(sp);
        const ConformingProjector P(sp, cfg.kind, variant);

        MaxwellState state;
        state.E = proj.project_conforming(P, map,
                                          [&](Vec2 x) { return bessel_E(mode, 0.0, x); });
        state.B = proj.project_conforming(2, P, map,
                                          [&](Vec2 x) { return bessel_B(mode, 0.0, x); });

        const double dt0 = cfg.dt > 0.0 ? cfg.dt : 0.5 * min_physical_edge(sp, map);
        const int steps = std::max(1, int(std::ceil(T / dt0)));
        const double dt = T / steps;
        for (int n = 0; n < steps; ++n)
            suzuki_yoshida4_step(state, sys, dt);

        const FieldCoeffs refE =
            proj.project_conforming(P, map, [&](Vec2 x) { return bessel_E(mode, T, x); });
        const FieldCoeffs refB =
            proj.project_conforming(2, P, map, [&](Vec2 x) { return bessel_B(mode, T, x); });

        auto rel_err = [](const SparseOperator& M, const std::vector<double>& a,
                          const std::vector<double>& b) {
            std::vector<double> d(a.size());
            for (std::size_t i = 0; i < a.size(); ++i)
                d[i] = a[i] - b[i];
            const double num = dot(d, M.apply(d));
            const double den = dot(b, M.apply(b));
            return std::sqrt(num / den);
        };

        MaxwellRow row;
        row.Ns = Ns;
        row.dofs = sp.dim1 + sp.dim2;
        row.e_err = rel_err(sys.Mt1, state.E.data, refE.data);
        row.b_err = rel_err(sys.Mt2, state.B.data, refB.data);
        row.steps = steps;
        if (!study.rows.empty()) {
            row.e_rate = rate_of(study.rows.back().e_err, row.e_err);
            row.b_rate = rate_of(study.rows.back().b_err, row.b_err);
        } else {
            row.e_rate = row.b_rate = std::nan("");
        }
        row.seconds = seconds_since(t0);
        study.rows.push_back(row);

        if (log)
            *log << "maxwell p=" << cfg.degree << " Ns=" << Ns << " E=" << sci(row.e_err)
                 << " B=" << sci(row.b_err) << " steps=" << steps << "\n";
    }

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream csv(cfg.out_dir + "/results.csv");
        write_maxwell_csv(csv, study);
    }
    return study;
}

namespace {

struct Raster {
    int n = 0;
    double lo = 0, hi = 0;
    std::vector<double> values;  // NaN outside the domain

    double at(int ix, int iy) const { return values[std::size_t(iy) * n + ix]; }
    double coord(int i) const { return lo + (hi - lo) * i / (n - 1); }
};

Raster sample_B_raster(const TensorDeRham& sp, const Mapping& map, const FieldCoeffs& B, int n)
{
    Raster r;
    r.n = n;
    r.lo = -1.05;
    r.hi = 1.05;
    r.values.assign(std::size_t(n) * n, std::nan(""));
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const Vec2 x{r.coord(ix), r.coord(iy)};
            const auto st = inverse_map(map, x, 1e-11);
            if (!st || st->x > map.max_s() * (1.0 - 1e-12))
                continue;
            const double s = std::max(st->x, 1e-9);
            const double bhat = eval_logical_scalar(sp, B, s, st->y);
            r.values[std::size_t(iy) * n + ix] = pushforward2(map, bhat, s, st->y);
        }
    return r;
}

double pole_roughness(const Raster& r, Vec2 pole, double radius)
{
    double m = 0.0;
    for (int iy = 1; iy + 1 < r.n; ++iy)
        for (int ix = 1; ix + 1 < r.n; ++ix) {
            const Vec2 x{r.coord(ix), r.coord(iy)};
            if ((x - pole).norm() > radius)
                continue;
            const double c = r.at(ix, iy);
            const double dxx = r.at(ix - 1, iy) - 2.0 * c + r.at(ix + 1, iy);
            const double dyy = r.at(ix, iy - 1) - 2.0 * c + r.at(ix, iy + 1);
            if (std::isfinite(dxx))
                m = std::max(m, std::abs(dxx));
            if (std::isfinite(dyy))
                m = std::max(m, std::abs(dyy));
        }
    return m;
}

void write_raster(const std::string& path, const Raster& r)
{
    std::ofstream os(path);
    char buf[96];
    for (int iy = 0; iy < r.n; ++iy)
        for (int ix = 0; ix < r.n; ++ix) {
            std::snprintf(buf, sizeof(buf), "%.11e %.11e %.11e\n", r.coord(ix), r.coord(iy),
                          r.at(ix, iy));
            os << buf;
        }
}

}  // namespace

std::vector<WaveDemo> run_wave_demo(const RunConfig& cfg, std::ostream* log)
{
    std::vector<WaveDemo> out;
    if (!cfg.out_dir.empty())
        std::filesystem::create_directories(cfg.out_dir);

    std::vector<double> times = cfg.snapshot_times;
    std::sort(times.begin(), times.end());

    for (int Ns : cfg.ns_list) {
        const int Ntheta = cfg.ntheta_factor * Ns;
        const PolarMapping map = build_shifted_disk_map(cfg.degree, Ns, Ntheta, cfg.pole_shift);
        const TensorDeRham& sp = map.space();
        const QuadratureGrid grid = QuadratureGrid::build(sp, map);

        MaxwellSystem sys = build_maxwell_system(sp, grid, cfg.kind, MapVariant::spline,
                                                 cfg.threads);
        sys.cg_tol = cfg.cg_tol;
        const GeometricProjector proj(sp);
        const ConformingProjector P(sp, cfg.kind, MapVariant::spline);
        const MaxwellInitialData init = gaussian_pulse_initial(cfg.sigma, proj, P, map);

        MaxwellState state{init.E, init.B, 0.0};
        const double dt = cfg.dt > 0.0 ? cfg.dt : 0.5 * min_physical_edge(sp, map);

        WaveDemo demo;
        demo.Ns = Ns;
        demo.coarse_warning = Ns <= 8;

        for (double t_target : times) {
            while (state.t + 0.5 * dt < t_target)
                maxwell_leapfrog_step(state, sys, dt);

            const Raster raster = sample_B_raster(sp, map, state.B, cfg.raster);
            WaveSnapshot snap;
            snap.time = state.t;
            snap.pole_roughness = pole_roughness(raster, map.pole(), 0.3);
            if (!cfg.out_dir.empty()) {
                char name[64];
                std::snprintf(name, sizeof(name), "wave_Ns%03d_t%05.2f.txt", Ns, t_target);
                snap.file = cfg.out_dir + "/" + name;
                write_raster(snap.file, raster);
            }
            demo.snapshots.push_back(snap);
            if (log)
                *log << "wave Ns=" << Ns << " t=" << state.t
                     << " roughness=" << sci(snap.pole_roughness)
                     << (demo.coarse_warning ? "  [coarse grid: spurious oscillations possible]"
                                             : "")
                     << "\n";
        }
        out.push_back(std::move(demo));
    }
    return out;
}

bool VerifyReport::all_ok() const
{
    for (const VerifyItem& it : items)
        if (it.status == VerifyStatus::fail)
            return false;
    return true;
}

void write_poisson_csv(std::ostream& os, const PoissonStudy& study)
{
    os << "Ns,dofs,L2_err,H1_err,L2_rate,H1_rate,cg_iters,seconds\n";
    for (const PoissonRow& r : study.rows)
        os << r.Ns << "," << r.dofs << "," << sci(r.l2_err) << "," << sci(r.h1_err) << ","
           << sci(r.l2_rate) << "," << sci(r.h1_rate) << "," << r.cg_iters << ","
           << sci(r.seconds) << "\n";
}

void write_maxwell_csv(std::ostream& os, const MaxwellStudy& study)
{
    os << "Ns,dofs,E_err,B_err,E_rate,B_rate,steps,seconds\n";
    for (const MaxwellRow& r : study.rows)
        os << r.Ns << "," << r.dofs << "," << sci(r.e_err) << "," << sci(r.b_err) << ","
           << sci(r.e_rate) << "," << sci(r.b_rate) << "," << r.steps << "," << sci(r.seconds)
           << "\n";
}

void write_verify_report(std::ostream& os, const VerifyReport& report)
{
    for (const VerifyItem& it : report.items) {
        const char* s = it.status == VerifyStatus::pass ? "PASS"
                        : it.status == VerifyStatus::fail ? "FAIL"
                                                          : "SKIPPED";
        os << s << "  " << it.name;
        if (!it.detail.empty())
            os << "  (" << it.detail << ")";
        os << "\n";
    }
    os << (report.all_ok() ? "verify: all checks passed\n" : "verify: FAILURES present\n");
}

}  // namespace polarfeec
