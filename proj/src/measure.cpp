#include "dilution/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dilution/errors.hpp"

namespace dilution {

namespace {

void check_atom(const Atom& a) {
  if (!(a.x > 0.0 && a.x <= 1.0)) {
    std::ostringstream os;
    os << "atom location " << a.x << " outside (0,1]";
    fail(ErrorCode::kInvalidArgument, os.str());
  }
  if (!(a.m >= 0.0) || !std::isfinite(a.m)) {
    std::ostringstream os;
    os << "atom mass " << a.m << " at x=" << a.x << " is not a finite nonnegative number";
    fail(ErrorCode::kInvalidArgument, os.str());
  }
}

double binomial_count(std::size_t k, std::size_t r) {
  double c = 1.0;
  for (std::size_t i = 0; i < r; ++i) c = c * static_cast<double>(k - i) / static_cast<double>(i + 1);
  return c;
}

}  // namespace

DesignMeasure::DesignMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  for (const auto& a : atoms_) check_atom(a);
}

DesignMeasure DesignMeasure::single(double x, double m) { return DesignMeasure({Atom{x, m}}); }

DesignMeasure DesignMeasure::scaled(double t) const {
  require(t >= 0.0 && std::isfinite(t), "measure scale factor must be finite and nonnegative");
  std::vector<Atom> out(atoms_);
  for (auto& a : out) a.m *= t;
  return DesignMeasure(std::move(out));
}

DesignMeasure operator+(const DesignMeasure& a, const DesignMeasure& b) {
  std::vector<Atom> out(a.atoms_);
  out.insert(out.end(), b.atoms_.begin(), b.atoms_.end());
  return DesignMeasure(std::move(out));
}

void ConstraintSpec::validate() const {
  require(total_mass > 0.0 && std::isfinite(total_mass), "total mass must be positive");
  require(volume_budget > 0.0 && volume_budget <= 1.0, "volume budget must lie in (0,1]");
}

double total_mass(const DesignMeasure& mu) {
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.m;
  return s;
}

double total_volume(const DesignMeasure& mu) {
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.m * a.x;
  return s;
}

DesignMeasure normalize(const DesignMeasure& mu, double drop_tol) {
  require(drop_tol >= 0.0, "drop tolerance must be nonnegative");
  std::vector<Atom> atoms(mu.atoms().begin(), mu.atoms().end());
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });

  // Merge clusters until stable; a merged location can land within the
  // tolerance of its neighbour.
  bool merged = true;
  while (merged) {
    merged = false;
    std::vector<Atom> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms) {
      if (!out.empty() && a.x - out.back().x <= kMergeTol) {
        Atom& b = out.back();
        const double m = a.m + b.m;
        if (m > 0.0) b.x = (a.x * a.m + b.x * b.m) / m;
        b.m = m;
        merged = true;
      } else {
        out.push_back(a);
      }
    }
    atoms.swap(out);
  }
  std::erase_if(atoms, [drop_tol](const Atom& a) { return a.m < drop_tol || a.m == 0.0; });
  return DesignMeasure(std::move(atoms));
}

DesignMeasure round_to_integer_design(const DesignMeasure& mu, double volume_budget) {
  const DesignMeasure base = normalize(mu, 0.0);
  const auto atoms = base.atoms();
  const double mass = total_mass(base);
  const double target = std::round(mass);
  if (std::abs(mass - target) > 1e-6) {
    std::ostringstream os;
    os << "total mass " << mass << " is not integral; no integer rounding preserves it";
    fail(ErrorCode::kNonIntegralDesign, os.str());
  }

  const std::size_t k = atoms.size();
  std::vector<double> floors(k), fracs(k);
  double floor_sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    floors[j] = std::floor(atoms[j].m + 1e-9);
    fracs[j] = std::max(0.0, atoms[j].m - floors[j]);
    floor_sum += floors[j];
  }
  const auto extra = static_cast<long>(std::llround(target - floor_sum));
  if (extra < 0 || extra > static_cast<long>(k)) {
    fail(ErrorCode::kNonIntegralDesign, "cannot distribute rounding remainder over atoms");
  }
  const auto r = static_cast<std::size_t>(extra);

  const double slack = 1e-12 * std::max(1.0, volume_budget);
  const bool volume_bound = total_volume(base) <= volume_budget + slack;
  double floor_volume = 0.0;
  for (std::size_t j = 0; j < k; ++j) floor_volume += floors[j] * atoms[j].x;

  // Choosing atom j adds (1-f)^2 - f^2 = 1 - 2f to the squared distance.
  std::vector<std::size_t> best;
  double best_cost = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<std::size_t>& chosen) {
    double cost = 0.0, vol = floor_volume;
    for (auto j : chosen) {
      cost += 1.0 - 2.0 * fracs[j];
      vol += atoms[j].x;
    }
    if (volume_bound && vol > volume_budget + slack) return;
    if (cost < best_cost - 1e-15) {
      best_cost = cost;
      best = chosen;
    }
  };

  if (binomial_count(k, r) <= 2e5) {
    std::vector<std::size_t> chosen(r);
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    while (true) {
      consider(chosen);
      // next combination in lexicographic order
      std::size_t i = r;
      while (i > 0 && chosen[i - 1] == k - r + i - 1) --i;
      if (i == 0) break;
      ++chosen[i - 1];
      for (std::size_t j = i; j < r; ++j) chosen[j] = chosen[j - 1] + 1;
    }
  } else {
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fracs[a] > fracs[b]; });
    consider(std::vector<std::size_t>(order.begin(), order.begin() + static_cast<long>(r)));
    if (!std::isfinite(best_cost)) {
      // smallest-volume completion keeps the budget if anything does
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return atoms[a].x < atoms[b].x; });
      consider(std::vector<std::size_t>(order.begin(), order.begin() + static_cast<long>(r)));
    }
  }
  if (!std::isfinite(best_cost)) {
    fail(ErrorCode::kInfeasible, "no integer rounding keeps the design within the volume budget");
  }

  std::vector<double> masses(floors);
  for (auto j : best) masses[j] += 1.0;
  std::vector<Atom> out;
  for (std::size_t j = 0; j < k; ++j) {
    if (masses[j] > 0.0) out.push_back({atoms[j].x, masses[j]});
  }
  return DesignMeasure(std::move(out));
}

}  // namespace dilution
