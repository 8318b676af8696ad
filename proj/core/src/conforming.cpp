#include "polarfeec/conforming.hpp"

#include <cmath>
#include <stdexcept>

namespace polarfeec {

namespace {

double ring_mean(const TensorDeRham& sp, std::span<const double> c, int ring)
{
    double m = 0.0;
    for (int j = 0; j < sp.ntheta; ++j)
        m += c[sp.idx0(ring, j)];
    return m / sp.ntheta;
}

}  // namespace

ConformityCheck is_conforming(const TensorDeRham& sp, Kind kind, MapVariant variant, int level,
                              std::span<const double> coeffs, double tol)
{
    if (tol <= 0.0)
        throw std::invalid_argument("is_conforming: tolerance must be positive");
    if (int(coeffs.size()) != space_dim(sp, level))
        throw std::invalid_argument("is_conforming: coefficient size mismatch");

    ConformityCheck out;
    const int n = sp.ntheta;
    const double dt = 2.0 * M_PI / n;
    auto track = [&](double residual) { out.defect = std::max(out.defect, std::abs(residual)); };

    if (level == 0) {
        out.params.gamma0 = ring_mean(sp, coeffs, 0);
        for (int j = 0; j < n; ++j)
            track(coeffs[sp.idx0(0, j)] - out.params.gamma0);
        if (kind == Kind::U) {
            if (variant == MapVariant::spline) {
                for (int j = 0; j < n; ++j) {
                    out.params.gamma1 += 2.0 / n * coeffs[sp.idx0(1, j)] * std::cos(j * dt);
                    out.params.gamma2 += 2.0 / n * coeffs[sp.idx0(1, j)] * std::sin(j * dt);
                }
                for (int j = 0; j < n; ++j)
                    track(coeffs[sp.idx0(1, j)] - out.params.gamma0 -
                          out.params.gamma1 * std::cos(j * dt) -
                          out.params.gamma2 * std::sin(j * dt));
            } else {
                for (int j = 0; j < n; ++j)
                    track(coeffs[sp.idx0(1, j)] - out.params.gamma0);
            }
        }
    } else if (level == 1) {
        auto vs = [&](int i, int j) { return coeffs[sp.idx1s(i, sp.wrap(j))]; };
        auto vt = [&](int i, int j) { return coeffs[sp.idx1t(i, sp.wrap(j))]; };
        for (int j = 0; j < n; ++j) {
            track(vt(0, j));
            track(vt(1, j) - (vs(0, j + 1) - vs(0, j)));
        }
        if (kind == Kind::U) {
            if (variant == MapVariant::spline) {
                for (int j = 0; j < n; ++j) {
                    out.params.eta1 += 2.0 / n * vs(0, j) * std::cos(j * dt);
                    out.params.eta2 += 2.0 / n * vs(0, j) * std::sin(j * dt);
                }
                for (int j = 0; j < n; ++j)
                    track(vs(0, j) - out.params.eta1 * std::cos(j * dt) -
                          out.params.eta2 * std::sin(j * dt));
            } else {
                for (int j = 0; j < n; ++j)
                    track(vs(0, j));
            }
        }
    } else if (level == 2) {
        for (int j = 0; j < n; ++j)
            track(coeffs[sp.idx2(0, j)]);
    } else {
        throw std::invalid_argument("is_conforming: level must be 0, 1 or 2");
    }

    out.conforming = out.defect <= tol;
    return out;
}

ConformingProjector::ConformingProjector(const TensorDeRham& sp, Kind kind, MapVariant variant)
    : sp_(sp), kind_(kind), variant_(variant), trigo_ok_(sp.kv_theta.trigo_ok())
{
    if (kind == Kind::U && sp.p < 2)
        throw std::invalid_argument("ConformingProjector: the C^1 sequence needs degree >= 2");
    if (sp.ns < 4)
        throw std::invalid_argument("ConformingProjector: radial dimension too small");

    cosj_.resize(sp.ntheta);
    sinj_.resize(sp.ntheta);
    const double dt = 2.0 * M_PI / sp.ntheta;
    for (int j = 0; j < sp.ntheta; ++j) {
        cosj_[j] = std::cos(j * dt);
        sinj_[j] = std::sin(j * dt);
    }
}

void ConformingProjector::harmonic_project(std::span<const double> x, std::span<double> out) const
{
    const int n = sp_.ntheta;
    double c1 = 0.0, c2 = 0.0;
    for (int k = 0; k < n; ++k) {
        c1 += 2.0 / n * cosj_[k] * x[k];
        c2 += 2.0 / n * sinj_[k] * x[k];
    }
    for (int j = 0; j < n; ++j)
        out[j] = c1 * cosj_[j] + c2 * sinj_[j];
}

void ConformingProjector::apply0(std::span<double> c) const
{
    const int n = sp_.ntheta;
    const double mean = ring_mean(sp_, c, 0);
    for (int j = 0; j < n; ++j)
        c[sp_.idx0(0, j)] = mean;

    if (kind_ == Kind::U) {
        std::vector<double> ring1(n);
        for (int j = 0; j < n; ++j)
            ring1[j] = c[sp_.idx0(1, j)];
        std::vector<double> harm(n, 0.0);
        if (variant_ == MapVariant::spline)
            harmonic_project(ring1, harm);
        for (int j = 0; j < n; ++j)
            c[sp_.idx0(1, j)] = mean + harm[j];
    }
}

void ConformingProjector::apply1(std::span<double> c) const
{
    const int n = sp_.ntheta;
    std::vector<double> s0(n);
    for (int j = 0; j < n; ++j)
        s0[j] = c[sp_.idx1s(0, j)];

    if (kind_ == Kind::U) {
        std::vector<double> bar(n, 0.0);
        if (variant_ == MapVariant::spline)
            harmonic_project(s0, bar);
        for (int j = 0; j < n; ++j) {
            c[sp_.idx1s(0, j)] = bar[j];
            c[sp_.idx1s(1, j)] += s0[j] - bar[j];
        }
        s0 = bar;
    }
    for (int j = 0; j < n; ++j) {
        c[sp_.idx1t(0, j)] = 0.0;
        c[sp_.idx1t(1, j)] = s0[sp_.wrap(j + 1)] - s0[j];
    }
}

void ConformingProjector::apply2(std::span<double> c) const
{
    for (int j = 0; j < sp_.ntheta; ++j) {
        c[sp_.idx2(1, j)] += c[sp_.idx2(0, j)];
        c[sp_.idx2(0, j)] = 0.0;
    }
}

void ConformingProjector::apply_inplace(int level, std::span<double> coeffs) const
{
    if (int(coeffs.size()) != space_dim(sp_, level))
        throw std::invalid_argument("ConformingProjector: coefficient size mismatch");
    switch (level) {
        case 0: apply0(coeffs); return;
        case 1: apply1(coeffs); return;
        case 2: apply2(coeffs); return;
    }
    throw std::invalid_argument("ConformingProjector: level must be 0, 1 or 2");
}

std::vector<double> ConformingProjector::apply(int level, std::span<const double> coeffs) const
{
    std::vector<double> out(coeffs.begin(), coeffs.end());
    apply_inplace(level, out);
    return out;
}

SparseOperator ConformingProjector::matrix(int level) const
{
    const int n = sp_.ntheta;
    std::vector<Triplet> t;
    auto pjk = [&](int j, int k) { return 2.0 / n * (cosj_[j] * cosj_[k] + sinj_[j] * sinj_[k]); };

    if (level == 0) {
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                t.push_back({sp_.idx0(0, j), sp_.idx0(0, k), 1.0 / n});
        if (kind_ == Kind::V) {
            for (int i = 1; i < sp_.ns; ++i)
                for (int j = 0; j < n; ++j)
                    t.push_back({sp_.idx0(i, j), sp_.idx0(i, j), 1.0});
        } else {
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    t.push_back({sp_.idx0(1, j), sp_.idx0(0, k), 1.0 / n});
                    if (variant_ == MapVariant::spline)
                        t.push_back({sp_.idx0(1, j), sp_.idx0(1, k), pjk(j, k)});
                }
            for (int i = 2; i < sp_.ns; ++i)
                for (int j = 0; j < n; ++j)
                    t.push_back({sp_.idx0(i, j), sp_.idx0(i, j), 1.0});
        }
        return SparseOperator::from_triplets(sp_.dim0, sp_.dim0, std::move(t));
    }

    if (level == 1) {
        if (kind_ == Kind::V) {
            for (int i = 0; i < sp_.ns - 1; ++i)
                for (int j = 0; j < n; ++j)
                    t.push_back({sp_.idx1s(i, j), sp_.idx1s(i, j), 1.0});
            for (int j = 0; j < n; ++j) {
                t.push_back({sp_.idx1t(1, j), sp_.idx1s(0, sp_.wrap(j + 1)), 1.0});
                t.push_back({sp_.idx1t(1, j), sp_.idx1s(0, j), -1.0});
            }
        } else {
            for (int j = 0; j < n; ++j) {
                if (variant_ == MapVariant::spline)
                    for (int k = 0; k < n; ++k) {
                        t.push_back({sp_.idx1s(0, j), sp_.idx1s(0, k), pjk(j, k)});
                        t.push_back({sp_.idx1s(1, j), sp_.idx1s(0, k), -pjk(j, k)});
                        // theta ring 1 holds the periodic difference of the harmonic part
                        t.push_back({sp_.idx1t(1, j), sp_.idx1s(0, k),
                                     pjk(sp_.wrap(j + 1), k) - pjk(j, k)});
                    }
                t.push_back({sp_.idx1s(1, j), sp_.idx1s(0, j), 1.0});
                t.push_back({sp_.idx1s(1, j), sp_.idx1s(1, j), 1.0});
            }
            for (int i = 2; i < sp_.ns - 1; ++i)
                for (int j = 0; j < n; ++j)
                    t.push_back({sp_.idx1s(i, j), sp_.idx1s(i, j), 1.0});
        }
        for (int i = 2; i < sp_.ns; ++i)
            for (int j = 0; j < n; ++j)
                t.push_back({sp_.idx1t(i, j), sp_.idx1t(i, j), 1.0});
        return SparseOperator::from_triplets(sp_.dim1, sp_.dim1, std::move(t));
    }

    if (level == 2) {
        for (int j = 0; j < n; ++j) {
            t.push_back({sp_.idx2(1, j), sp_.idx2(0, j), 1.0});
            t.push_back({sp_.idx2(1, j), sp_.idx2(1, j), 1.0});
        }
        for (int i = 2; i < sp_.ns - 1; ++i)
            for (int j = 0; j < n; ++j)
                t.push_back({sp_.idx2(i, j), sp_.idx2(i, j), 1.0});
        return SparseOperator::from_triplets(sp_.dim2, sp_.dim2, std::move(t));
    }
    throw std::invalid_argument("ConformingProjector::matrix: level must be 0, 1 or 2");
}

}  // namespace polarfeec
