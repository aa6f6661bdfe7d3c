#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "regext/regular_set.hpp"

namespace regext {

struct WhitneyOptions {
  /// A dyadic cube Q is accepted when accept_lo * diam Q <= dist(x_Q, S) <= accept_hi * diam Q.
  double accept_lo = 2.0;
  double accept_hi = 6.0;
  /// Cubes are never split below this radius; such cubes that miss the window are kept
  /// and flagged `floor`. Zero disables the floor.
  double min_radius = 0.0;
  int max_level = 60;
};

struct WhitneyCube {
  Cube cube;
  int level = 0;               // radius = root radius * 2^-level
  std::size_t anchor = 0;      // flat index of the S cell nearest to the center
  double center_dist = 0.0;    // |x_Q - a_Q|_inf
  bool clipped = false;        // Q* leaves the grid box
  bool floor = false;          // stopped at min_radius outside the acceptance window

  bool flagged() const { return clipped || floor; }
  /// dist(Q, S) measured to S cell centers.
  double dist_to_set() const { return std::max(0.0, center_dist - cube.radius); }
};

class WhitneyDecomposition {
 public:
  WhitneyDecomposition() = default;
  WhitneyDecomposition(const RegularSet& s, const WhitneyOptions& opts);

  const Grid& grid() const { return grid_; }
  const WhitneyOptions& options() const { return opts_; }
  std::size_t size() const { return cubes_.size(); }
  bool empty() const { return cubes_.empty(); }
  const WhitneyCube& operator[](std::size_t i) const { return cubes_[i]; }
  const std::vector<WhitneyCube>& cubes() const { return cubes_; }
  const Cube& root() const { return root_; }
  /// Per-cell distance to S in physical units.
  const std::vector<double>& dist() const { return dist_; }

  /// Cubes K with K* meeting Q* (Q included).
  std::vector<std::size_t> neighbors(std::size_t q) const;
  /// Cubes whose closed cube (or Q* when `star`) contains x.
  std::vector<std::size_t> containing(const Point& x, bool star) const;
  /// Position of a cube equal to q (center and radius within 1e-12 h); throws if absent.
  std::size_t find(const Cube& q) const;

 private:
  void build_buckets();
  template <class Fn>
  void for_each_bucket(const Cube& footprint, Fn&& fn) const;

  Grid grid_;
  WhitneyOptions opts_;
  Cube root_;
  std::vector<WhitneyCube> cubes_;
  std::vector<double> dist_;

  Point bucket_origin_{};
  double bucket_side_ = 1.0;
  Index bucket_dims_{1, 1, 1};
  std::vector<std::size_t> bucket_offsets_;
  std::vector<std::uint32_t> bucket_items_;
};

WhitneyDecomposition whitney_decompose(const RegularSet& s, const WhitneyOptions& opts = {});

std::vector<std::size_t> neighbors(const WhitneyDecomposition& w, const Cube& q);

/// 1-D profile: 1 on (-inf, 0], 0 on [1, inf), 1 - smoothstep of order 2m+1 between.
double bump_profile(double s, int m);
/// Tensor-product bump equal to 1 on Q and vanishing outside (9/8)Q.
double bump(const Cube& q, const Point& x, int n, int m);

/// phi_Q at every non-S cell center, stored per cell in CSR form.
struct PartitionOfUnity {
  int m = 4;
  bool normalized = true;
  std::vector<std::size_t> offsets;  // size grid cells + 1; S cells have empty rows
  std::vector<std::uint32_t> cube;
  std::vector<double> phi;

  std::size_t row_begin(std::size_t cell) const { return offsets[cell]; }
  std::size_t row_end(std::size_t cell) const { return offsets[cell + 1]; }
};

/// `normalize = false` leaves the raw bumps (used for fault injection).
PartitionOfUnity partition_of_unity(const WhitneyDecomposition& w, const CellSet& s, int m = 4,
                                    bool normalize = true);

/// (cube, phi_Q(x)) pairs at an arbitrary point of the complement.
std::vector<std::pair<std::size_t, double>> phi_at(const WhitneyDecomposition& w, const Point& x, int m);

struct WhitneyCheck {
  std::size_t cubes = 0;
  std::size_t flagged = 0;
  std::size_t uncovered_cells = 0;     // non-S cell centers in no cube
  std::size_t window_violations = 0;   // unflagged cubes with dist(Q,S) outside [diam, 4 diam]
  std::size_t ratio_violations = 0;    // unflagged neighbor pairs outside [1/4, 4]
  std::size_t overlap_violations = 0;  // interiors overlapping
  int max_multiplicity = 0;            // closed cubes containing one sample point
  int max_neighbors = 0;               // N'(n): cubes of W* meeting one K*
  double max_dist_ratio = 0.0;
  double min_dist_ratio = kInf;
};

/// Asserts the decomposition invariants exactly; multiplicity is measured at all cell
/// centers plus `random_points` seeded samples.
WhitneyCheck check_whitney(const WhitneyDecomposition& w, const CellSet& s, std::size_t random_points = 0,
                           unsigned seed = 1);

struct PartitionCheck {
  std::size_t points = 0;
  double max_sum_error = 0.0;
  double min_phi = 0.0;
  double max_phi = 0.0;
  std::size_t support_violations = 0;
  /// sup |D^beta phi_Q| (diam Q)^{|beta|} by finite differences, |beta| = 1, 2.
  double grad_constant = 0.0;
  double hessian_constant = 0.0;
};

PartitionCheck check_partition(const WhitneyDecomposition& w, const PartitionOfUnity& pu, const CellSet& s,
                               std::size_t derivative_samples = 200, unsigned seed = 1);

}  // namespace regext
