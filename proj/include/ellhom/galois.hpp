#pragma once

#include <functional>
#include <optional>

#include "ellhom/torsion.hpp"

namespace ellhom {

// The Z/n-module { M : M F_E = F_E' M } of Galois-equivariant maps
// E[n] -> E'[n] in matrix form.
struct IntertwinerModule {
    int64 level = 0;
    Mat2 frob_domain, frob_codomain;
    std::vector<Mat2> generators;
    BigInt cardinality = 0;
    std::shared_ptr<HowellForm> module;  // canonical form over (Z/n)^4
};

IntertwinerModule intertwiners_from_matrices(const Mat2& f_domain, const Mat2& f_codomain);
IntertwinerModule intertwiners(TorsionContext& e, TorsionContext& e2, int64 n);

// brute-force count over all n^4 matrices, for validation at small n
BigInt intertwiner_count_bruteforce(const Mat2& f_domain, const Mat2& f_codomain);

struct GaloisIsoResult {
    bool isomorphic = false;
    std::optional<Mat2> witness;
};

GaloisIsoResult invertible_intertwiner(const IntertwinerModule& mod);
GaloisIsoResult galois_isomorphic(TorsionContext& e, TorsionContext& e2, int64 n);

// Compatible-basis tower for levels ell, ell^2, ..., ell^depth over one common
// ambient field for both curves. Lower-level bases are multiples of the top
// basis, so reductions of matrices are literal entry-wise reductions.
class TorsionTower {
public:
    TorsionTower(TorsionContext& e, TorsionContext& e2, int64 ell, int depth);

    int64 ell() const { return ell_; }
    int depth() const { return depth_; }
    int ambient_degree() const { return ambient_; }
    int64 level(int i) const { return levels_[i]; }  // i in [0, depth)

    const Curve& curve1() const { return *c1_; }
    const Curve& curve2() const { return *c2_; }

    Mat2 frobenius1(int i) const { return frob1_[i]; }
    Mat2 frobenius2(int i) const { return frob2_[i]; }
    const IntertwinerModule& module_at(int i) const { return modules_[i]; }

    // matrix of a pointwise map E1 -> E2 at level ell^{i+1}, in the tower bases
    Mat2 action_matrix(int i, const std::function<Point(const Point&)>& map) const;

private:
    std::pair<int64, int64> dlog(int curve, int i, const Point& pt) const;

    int64 ell_;
    int depth_;
    int ambient_ = 0;
    std::vector<int64> levels_;
    std::shared_ptr<const Curve> c1_, c2_;
    std::vector<Point> p1_, q1_, p2_, q2_;
    std::vector<std::unordered_map<std::string, std::pair<int64, int64>>> dlog1_, dlog2_;
    std::vector<Mat2> frob1_, frob2_;
    std::vector<IntertwinerModule> modules_;
};

struct TowerLevelReport {
    int64 modulus = 0;  // ell^i
    BigInt module_cardinality = 0;
    // cardinality of the image of the level-(i+j) module inside level i, j ascending
    std::vector<BigInt> image_cardinalities;
    int stabilization_offset = -1;
    std::shared_ptr<HowellForm> stabilized_image;
};

struct TowerReport {
    int64 ell = 0;
    int depth = 0;
    std::vector<TowerLevelReport> levels;
};

TowerReport level_tower_stabilization(TorsionTower& tower);

// the unit root of T^2 - a_p T + p mod p^precision (ordinary curves only)
BigInt unit_root(int64 a_p, int64 p, int precision);

struct PPartReport {
    bool isomorphic = false;
    int precision = 0;
    BigInt modulus = 0;
    BigInt unit_root_1 = 0, unit_root_2 = 0;
};

PPartReport p_part_isomorphic(TorsionContext& e, TorsionContext& e2, int precision);

}  // namespace ellhom
