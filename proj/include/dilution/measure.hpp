#pragma once

#include <span>
#include <vector>

namespace dilution {

/// One dose class of a design: `m` doses of volume `x`.
struct Atom {
  double x;
  double m;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite atomic measure on (0,1]. Locations are dose volumes (fractions of
/// the substrate), masses are dose multiplicities. Construction validates
/// every atom; ordering is not enforced until normalize().
class DesignMeasure {
 public:
  DesignMeasure() = default;
  explicit DesignMeasure(std::vector<Atom> atoms);

  static DesignMeasure single(double x, double m);

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  DesignMeasure scaled(double t) const;
  friend DesignMeasure operator+(const DesignMeasure& a, const DesignMeasure& b);
  friend bool operator==(const DesignMeasure&, const DesignMeasure&) = default;

 private:
  std::vector<Atom> atoms_;
};

/// Right-hand sides of the mass equality and the volume inequality.
struct ConstraintSpec {
  double total_mass;
  double volume_budget = 1.0;

  void validate() const;
};

inline constexpr double kDefaultDropTol = 1e-9;
inline constexpr double kMergeTol = 1e-10;

double total_mass(const DesignMeasure& mu);
double total_volume(const DesignMeasure& mu);

/// Sorts atoms, merges locations closer than kMergeTol (mass-weighted
/// location) and removes atoms lighter than drop_tol.
DesignMeasure normalize(const DesignMeasure& mu, double drop_tol = kDefaultDropTol);

/// Nearest integer-mass design with the same total mass. When the input fits
/// the volume budget the result does too.
DesignMeasure round_to_integer_design(const DesignMeasure& mu, double volume_budget = 1.0);

}  // namespace dilution
