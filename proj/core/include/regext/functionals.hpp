#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "regext/approx.hpp"
#include "regext/prefix_sum.hpp"

namespace regext {

/// v = (s, k, q, u) plus the outer exponent p.
struct SpaceParams {
  double s = 0.0;
  int k = 1;
  double p = 2.0;
  double q = kInf;
  double u = 1.0;
};

enum class Space { sharp, sobolev, triebel_lizorkin, besov };

std::string to_string(Space space);
Space space_from_string(const std::string& name);

/// Empty when v is admissible for the target, otherwise the violated constraint.
std::string admissibility_violation(const SpaceParams& v, Space target);
void require_admissible(const SpaceParams& v, Space target);
/// Very small q (< 1/4) is computed but not validated.
bool unvalidated_q(const SpaceParams& v);

/// k = -floor(-alpha), the greatest integer strictly less than alpha + 1.
int sharp_order(double alpha);

/// t_j = h 2^{j / density}, j = 0..J, capped at `cap`.
class RadiusLadder {
 public:
  RadiusLadder() = default;
  RadiusLadder(double h, double cap, double density = 4.0);

  double h() const { return h_; }
  double density() const { return density_; }
  std::size_t size() const { return t_.size(); }
  double operator[](std::size_t j) const { return t_[j]; }
  const std::vector<double>& values() const { return t_; }
  /// Number of leading values <= cap.
  std::size_t count_upto(double cap) const;
  /// Index of t within the ladder; throws if t is not (within 1e-9 relative) a ladder value.
  std::size_t index_of(double t) const;

 private:
  double h_ = 1.0;
  double density_ = 4.0;
  std::vector<double> t_;
};

/// Trapezoid rule in log t for int g(t) dt/t over the ladder values with indices [lo, hi].
double log_trapezoid(const std::vector<double>& t, const std::vector<double>& g, std::size_t lo, std::size_t hi);

/// A radius t selects the cells with centers in Q(x, t), i.e. the cells of Q(x, r_eff)
/// with r_eff = (m + 1/2) h, m = floor(t / h). All normalisations use r_eff.
int footprint_halfwidth(double t, double h);
double effective_radius(double t, double h);

struct FieldOptions {
  /// Layers with half-width m are evaluated on a lattice of stride 2^floor(log2(m / factor))
  /// and interpolated multilinearly; 0 evaluates every cell.
  double stride_factor = 2.0;
  /// An extra inner exponent besides 1, 2 and inf (0 = none).
  double extra_u = 0.0;
};

/// Normalised local approximations E_k(f; Q(x, t))_{L_u(S)} for every domain cell x and
/// every ladder radius. The domain is S (mask given) or the whole box (mask null).
class LocalApproxField {
 public:
  LocalApproxField(const GridFunction& f, const CellSet* mask, int k, const RadiusLadder& ladder,
                   const FieldOptions& opts = {});

  const Grid& grid() const { return grid_; }
  const RadiusLadder& ladder() const { return ladder_; }
  int k() const { return k_; }
  bool masked() const { return masked_; }
  const std::vector<std::uint8_t>& domain() const { return domain_; }
  const std::vector<std::size_t>& domain_cells() const { return cells_; }

  /// Value at a domain cell for ladder index j.
  double at(std::size_t cell, std::size_t j, double u) const;
  /// Same for an arbitrary radius whose half-width was evaluated (any ladder value).
  double at_radius(std::size_t cell, double r, double u) const;
  /// All domain cells for ladder index j, zero off the domain.
  std::vector<double> layer(std::size_t j, double u) const;
  /// || E(., t_j)_{L_u} ||_{L_p(domain)} for every j; memoised.
  const std::vector<double>& norm_curve(double u, double p) const;
  /// Number of domain cells within `m` cells (sup norm) of a cell.
  std::int64_t domain_count(std::size_t cell, int m) const;

 private:
  struct Layer {
    int m = 0;
    int stride = 1;
    Index lattice_dims{1, 1, 1};
    std::vector<int> lo[kMaxDim];     // per axis: lower lattice coordinate of each cell
    std::vector<double> w[kMaxDim];   // per axis: weight of the upper neighbour
    std::vector<int> coord[kMaxDim];  // per axis: cell index of each lattice coordinate
    std::vector<double> e1, e2, einf, ex;
  };
  const Layer& layer_for(double r) const;
  const std::vector<double>& values(const Layer& l, double u) const;
  int slot(double u) const;

  Grid grid_;
  RadiusLadder ladder_;
  int k_ = 1;
  bool masked_ = false;
  FieldOptions opts_;
  std::vector<std::uint8_t> domain_;
  std::vector<std::size_t> cells_;
  std::map<int, Layer> layers_;
  std::vector<int> ladder_m_;
  PrefixSum<std::int64_t> domain_sum_;
  std::unique_ptr<std::mutex> memo_mutex_ = std::make_unique<std::mutex>();
  mutable std::map<std::pair<double, double>, std::vector<double>> curves_;
};

/// sup_j r_j^{-alpha} E_k(f; Q(x, t_j))_{L_1(S)} with k = sharp_order(alpha); the field must have that k.
GridFunction sharp_maximal(const LocalApproxField& field, double alpha);
GridFunction sharp_maximal(const GridFunction& f, const CellSet& s, double alpha, const RadiusLadder& ladder,
                           const FieldOptions& opts = {});

/// Generalised sharp function over ladder radii <= cap (inf for no cap).
GridFunction generalized_sharp(const LocalApproxField& field, const SpaceParams& v, double cap);
GridFunction generalized_sharp(const GridFunction& f, const CellSet& s, const SpaceParams& v, double cap,
                               const RadiusLadder& ladder, const FieldOptions& opts = {});

/// (sup cube averages of |g|^u over Q(x, t_j), and over the cell itself as t -> 0)^{1/u},
/// normalised by the full cube volume.
GridFunction hl_maximal(const GridFunction& g, double u, const RadiusLadder& ladder);

GridFunction zero_extend(const GridFunction& f, const CellSet& s);

/// Sum_j (-1)^{k-j} binom(k, j) f(x + j d) at every cell where all points stay in the box.
double finite_difference_norm(const GridFunction& f, int k, const Index& shift, double p);
/// omega_k(f; t)_{L_p} for every ladder value t >= h.
std::vector<double> modulus_continuity_curve(const GridFunction& f, int k, double p, const RadiusLadder& ladder);
double modulus_continuity(const GridFunction& f, int k, double p, double t, const RadiusLadder& ladder);

struct PackingResult {
  double packing = 0.0;   // greedy packing estimator (primary)
  double integral = 0.0;  // || E_k(f; Q(., t))_{L_u(S)} ||_{L_p(S)}
  std::size_t cubes = 0;
  std::vector<std::size_t> centers;
};

/// Omega_{k,p}(f; t)_{L_u(S)} from packings of cubes of diameter t centered in the domain.
/// The field must contain t and t / 2 among its radii; requires t >= 4h. `integral` also
/// fills the integral estimator from the layer at t.
PackingResult kp_modulus(const LocalApproxField& field, double p, double u, double t, bool integral = true);

/// Greedy split of a family of equal cubes (centers, common half-width in cells) into packings;
/// returns the number of packings.
int split_into_packings(const Grid& g, const std::vector<std::size_t>& centers, int halfwidth);

struct NormValue {
  double value = 0.0;
  double lp = 0.0;
  double seminorm = 0.0;
  bool unvalidated = false;
};

/// Intrinsic trace functionals on S; `field` is the masked field of f with order params.k.
NormValue trace_norm(Space space, const GridFunction& f, const LocalApproxField& field, const SpaceParams& v);

enum class WholeSpace { calderon, triebel_lizorkin, besov_modulus, besov_localapprox };

std::string to_string(WholeSpace kind);

/// Whole-box functionals of F; `field` is the unmasked field of F with order params.k. The
/// besov_modulus norm needs `omega` = modulus_continuity_curve(F, k, p, ladder).
NormValue wholespace_norm(WholeSpace kind, const GridFunction& F, const LocalApproxField& field,
                          const SpaceParams& v, const std::vector<double>* omega = nullptr);

}  // namespace regext
