#pragma once

#include <functional>
#include <string>

namespace sml {

enum class ManifoldKind { circle, sphere, revolution };
enum class BoundaryKind { periodic, symmetric_poles };

/// One-dimensional meridian description of a symmetric model manifold.
///
/// The meridian coordinate s runs over [0, domain_length]. All manifold
/// integrals reduce to weighted line integrals with the density
///   w(s) = c_d f(s)^{d-1}   (sphere / revolution, c_d = |S^{d-1}|)
///   w(s) = 1                (circle)
/// so that "integral of g dv_g" means "integral of g(s) w(s) ds" and equals
/// the genuine manifold integral in the Lebesgue-induced measure convention.
///
/// Axisymmetric smooth functions satisfy u'(0) = u'(L) = 0 on pole-closed
/// meridians; that regularity is what the discretization enforces.
struct ManifoldProfile {
  ManifoldKind kind = ManifoldKind::sphere;
  int d = 0;
  double domain_length = 0.0;

  // f, f', f'' along the meridian. Unused (empty) for circles.
  std::function<double(double)> profile;
  std::function<double(double)> profile_d1;
  std::function<double(double)> profile_d2;

  // 1D volume-element density w(s) and transverse-orbit volume c_d.
  std::function<double(double)> weight;
  double orbit_volume = 1.0;

  double volume = 0.0;
  double lambda_one = 0.0;
  BoundaryKind boundary = BoundaryKind::symmetric_poles;

  // Ric(e_s, e_s) along the unit meridian direction: d-1 on S^d, -f''/f on a
  // d=2 revolution, 0 on the circle.
  std::function<double(double)> ricci_meridian;
  // Gauss curvature, d=2 surfaces only (sphere: 1, revolution: -f''/f).
  std::function<double(double)> gauss_curvature;

  std::string descriptor;  // e.g. "sphere:2", for artifact metadata
};

/// Volume of the unit k-sphere S^k embedded in R^{k+1}.
double sphere_surface_volume(int k);

/// Unit sphere S^d. d=1 returns the circle of circumference 2*pi.
ManifoldProfile make_sphere(int d);

/// Flat circle of circumference L (lambda_one = (2*pi/L)^2).
ManifoldProfile make_circle(double L);

/// Surface of revolution (d = 2) with meridian profile f on [0, L].
/// Requires f > 0 on (0, L), f(0) = f(L) = 0, f'(0) = 1, f'(L) = -1 (smooth
/// pole closure, checked to 1e-6). lambda_one is computed numerically.
ManifoldProfile make_revolution(std::function<double(double)> f,
                                std::function<double(double)> f_d1,
                                std::function<double(double)> f_d2, double L);

/// Loads a revolution profile from a two-column text file (s, f(s)).
/// Rows must have strictly increasing s starting at 0; values are interpolated
/// with a clamped cubic spline (end slopes +1 / -1 per pole closure). The grid
/// must be fine enough that the spline resolves f''; closure is validated
/// against one-sided differences of the data.
ManifoldProfile load_revolution_profile(const std::string& path);

}  // namespace sml
