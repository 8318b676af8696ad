#pragma once

#include <span>

#include "polarfeec/derham.hpp"

namespace polarfeec {

/// Which conforming sequence the projections target: V is the H^1 (C^0)
/// sequence, U the C^1 sequence (requires degree >= 2).
enum class Kind { V, U };

/// The C^1 characterization depends on the mapping type: spline maps admit a
/// first-harmonic ring next to the pole, the analytical map locks it.
enum class MapVariant { analytical, spline };

/// Pole values encoded by the conforming coefficients: phi(x0) = gamma0,
/// grad phi(x0) = (gamma1,gamma2)/rho1 and v(x0) = (eta1,eta2)/rho1.
struct PoleParameters {
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double eta1 = 0.0;
    double eta2 = 0.0;
};

struct ConformityCheck {
    bool conforming = false;
    double defect = 0.0;  // largest violated constraint residual
    PoleParameters params;
};

/// Predicate form of the conforming-subspace characterizations: extracts the
/// pole parameters and verifies the ring constraints within `tol`.
ConformityCheck is_conforming(const TensorDeRham& sp, Kind kind, MapVariant variant, int level,
                              std::span<const double> coeffs, double tol);

/// Local conforming projection P^l: modifies only the spline coefficients of
/// the two rings closest to the pole, mapping tensor-product splines onto the
/// H^1- or C^1-conforming subspace. Both a matrix-free apply and an explicit
/// sparse matrix form are provided; they agree to machine precision.
class ConformingProjector {
public:
    ConformingProjector(const TensorDeRham& sp, Kind kind, MapVariant variant);

    Kind kind() const { return kind_; }
    MapVariant variant() const { return variant_; }
    /// false when 4 does not divide n_theta: the first-harmonic block is then
    /// not an exact projector and U-kind idempotence may fail
    bool harmonic_block_exact() const { return trigo_ok_; }

    void apply_inplace(int level, std::span<double> coeffs) const;
    std::vector<double> apply(int level, std::span<const double> coeffs) const;
    void apply(FieldCoeffs& c) const { apply_inplace(c.level, c.data); }

    SparseOperator matrix(int level) const;

private:
    TensorDeRham sp_;
    Kind kind_;
    MapVariant variant_;
    bool trigo_ok_;
    std::vector<double> cosj_, sinj_;  // cos/sin of the regular angles

    void apply0(std::span<double> c) const;
    void apply1(std::span<double> c) const;
    void apply2(std::span<double> c) const;
    // p x = harmonic part of x: (2/n) sum_k cos(theta_j - theta_k) x_k
    void harmonic_project(std::span<const double> x, std::span<double> out) const;
};

}  // namespace polarfeec
