#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "polarfeec/derham.hpp"

namespace polarfeec {

struct Mat22 {
    double a00 = 0, a01 = 0, a10 = 0, a11 = 0;

    double det() const { return a00 * a11 - a01 * a10; }
    Vec2 apply(Vec2 v) const { return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y}; }
    Vec2 apply_transpose(Vec2 v) const { return {a00 * v.x + a10 * v.y, a01 * v.x + a11 * v.y}; }
    Mat22 inverse() const;
};

struct Jacobian {
    Mat22 J;
    double det = 0.0;

    /// J^{-T} v, the covariant pushforward factor
    Vec2 inv_transpose_apply(Vec2 v) const;
};

/// Logical-to-physical mapping of the annulus [0,L] x [0,2pi).
class Mapping {
public:
    virtual ~Mapping() = default;
    virtual Vec2 eval(double s, double theta) const = 0;
    virtual Jacobian jacobian(double s, double theta) const = 0;
    virtual double max_s() const = 0;
};

/// Polar mapping collapsing the edge s=0 to the pole x0: either the analytical
/// map x0 + s(cos t, sin t), or a spline map with control points whose first
/// two rings sit on the pole and on a circle of radius rho1 around it.
class PolarMapping final : public Mapping {
public:
    enum class Kind { analytical, spline_control };

    static PolarMapping analytical(Vec2 x0, double L = 1.0);
    /// Control points are absolute coordinates, row-major (i*ntheta + j).
    /// Ring 0 must equal x0 and ring 1 must be a regular circle around it.
    static PolarMapping spline(const TensorDeRham& space, std::vector<Vec2> control, Vec2 x0);

    Vec2 eval(double s, double theta) const override;
    Jacobian jacobian(double s, double theta) const override;
    double max_s() const override { return L_; }

    Kind kind() const { return kind_; }
    Vec2 pole() const { return x0_; }
    double first_ring_radius() const { return rho1_; }  // spline maps only
    const TensorDeRham& space() const { return space_; }
    const std::vector<Vec2>& control_points() const { return control_; }

private:
    Kind kind_ = Kind::analytical;
    Vec2 x0_;
    double L_ = 1.0;
    double rho1_ = 0.0;
    TensorDeRham space_;  // level-0 space of the control net (spline maps)
    std::vector<Vec2> control_;
};

/// Sampled verification that a mapping degenerates linearly at the pole:
/// J_F ~ [C, sC'; S, sS'] with D = CS'-SC' > 0, det J_F >= s D_*.
struct SingularityProfile {
    std::vector<double> thetas;
    std::vector<double> C, S, D;
    double D_star = 0.0;     // min of D over the samples
    double mu = 0.0;         // rho1 * M_0(0) for spline maps
    double limit_error = 0.0;       // consistency of the s->0 extraction
    double closed_form_error = 0.0; // spline maps: match against the B-spline form of C,S
    double det_bound_margin = 0.0;  // min over samples of det J_F / (s D_*)
    bool ok = false;
    std::string message;
};

SingularityProfile verify_first_order_singularity(const Mapping& map, int n_theta_samples = 64);

// pointwise pushforward factors at (s,theta); physical value at x = F(s,theta)
double pushforward0(const Mapping& map, double value, double s, double theta);
Vec2 pushforward1(const Mapping& map, Vec2 value, double s, double theta);  // J^{-T} v
double pushforward2(const Mapping& map, double value, double s, double theta);  // v / det J

// pointwise pullbacks of physical fields, well defined up to s=0
double pullback0(const Mapping& map, const std::function<double(Vec2)>& phi, double s, double theta);
Vec2 pullback1(const Mapping& map, const std::function<Vec2(Vec2)>& v, double s, double theta);
double pullback2(const Mapping& map, const std::function<double(Vec2)>& f, double s, double theta);

/// Evaluate the pushforward of a logical field at (s,theta). Levels 1 and 2
/// are singular at the pole: s = 0 raises a domain error.
double pushforward_eval(int level, const Mapping& map,
                        const std::function<double(double, double)>& logical, double s,
                        double theta);
Vec2 pushforward_eval1(const Mapping& map, const std::function<Vec2(double, double)>& logical,
                       double s, double theta);

/// Spline approximation of the shifted-pole disk map
///   F_D(s,theta) = x0 - D (s^2, 0) + s (cos theta, sin theta), x0 = (D, 0),
/// interpolated at the Greville grid; the two rings closest to the pole are
/// then restored to the exact polar form required by the C^1 theory.
PolarMapping build_shifted_disk_map(int p, int Ns, int Ntheta, double D);

/// Newton inversion of the mapping; empty if x is outside the image or the
/// iteration leaves the parameter domain.
std::optional<Vec2> inverse_map(const Mapping& map, Vec2 x, double tol = 1e-13);

/// Control-point text format: header "p Ns Ntheta x0.x x0.y L", then one
/// "i j Px Py" line per control point at 17 significant digits.
void write_mapping(std::ostream& os, const PolarMapping& map);
PolarMapping read_mapping(std::istream& is);

}  // namespace polarfeec
