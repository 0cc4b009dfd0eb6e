#pragma once

#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "ellhom/curve.hpp"
#include "ellhom/linalg.hpp"

namespace ellhom {

// Extension caps. max_degree bounds ambient extension degrees; max_enum bounds
// field sizes for operations that genuinely enumerate a whole field or group.
// Torsion closures never enumerate fields, so only max_degree applies to them.
struct TorsionCaps {
    int max_degree = 12;
    BigInt max_enum = BigInt(100000000);
    int sample_budget = 2048;
};

struct TorsionBasis {
    int64 n = 0;
    int ambient_degree = 0;
    std::shared_ptr<const FiniteField> ext;
    std::shared_ptr<const Curve> curve;  // E over F_{p^m}
    Point P, Q;                          // independent, each of exact order n
};

// Subgroups of E[n] are carried both as points (in the ambient extension) and
// as coordinates in the level-n basis; the coordinates survive a change of
// ambient field, the points do not.
struct TorsionSubgroupDescriptor {
    int64 level = 0;
    int ambient_degree = 0;
    std::vector<Point> generators;
    std::vector<std::pair<int64, int64>> generator_coords;
};

struct PreimageReport {
    int64 level_n = 0;
    int64 multiplier_m = 0;
    BigInt w_order = 0;
    BigInt preimage_order = 0;
    bool order_formula_holds = false;   // #(m^-1 W) = #W * m^2
    bool image_is_w = false;            // m * (m^-1 W) = W
    bool contains_m_torsion = false;    // E[m] inside m^-1 W
};

struct GroupStructure {
    BigInt d1 = 1, d2 = 1;  // invariant factors, d1 | d2
};

// Per-curve torsion workspace with caching. The base curve lives over F_p;
// extensions, bases and discrete-log tables are built deterministically, so
// repeated runs give identical bases and matrices.
class TorsionContext {
public:
    TorsionContext(Curve base, TorsionCaps caps);

    const Curve& base() const { return base_; }
    const TorsionCaps& caps() const { return caps_; }
    int64 p() const { return base_.field().p(); }
    int64 trace() const { return trace_; }
    bool ordinary() const { return trace_ % p() != 0; }
    BigInt order_ext(int m) const;

    std::shared_ptr<const FiniteField> extension_field(int m);
    std::shared_ptr<const Curve> curve_over(int m);

    // smallest m with E[n] contained in E(F_{p^m}); cap_exceeded if > max_degree
    int full_torsion_degree(int64 n);
    const TorsionBasis& basis(int64 n);
    // basis over a prescribed ambient degree (must be a multiple of the
    // minimal one); lets two curves share one field for cross-curve maps
    const TorsionBasis& basis_at(int64 n, int m);

    // discrete log of R in the level-n basis; internal error if R outside E[n]
    std::pair<int64, int64> dlog2(int64 n, int m, const Point& r);
    std::vector<Point> enumerate_torsion(int64 n);

    Mat2 frobenius_matrix(int64 n);
    Mat2 frobenius_matrix_at(int64 n, int m);

    // points of E(F_{p^m}) of order dividing l^e; full gets set when the whole
    // of E[l^e] turned out to be rational (size l^{2e})
    std::vector<Point> rational_prime_power_torsion(int m, int64 ell, int e, bool& full);

    GroupStructure group_structure(int m);

    // r * E[n] with verification that it equals E[n / gcd(n, r)]
    TorsionSubgroupDescriptor mult_image_of_torsion(int64 n, int64 r);

    PreimageReport preimage_image_check(const TorsionSubgroupDescriptor& w, int64 multiplier);

private:
    struct BasisSlot {
        TorsionBasis basis;
        std::unordered_map<std::string, std::pair<int64, int64>> dlog;
    };

    BasisSlot& basis_slot(int64 n, int m);
    // one prime-power block of the level-n basis over F_{p^m}
    std::pair<Point, Point> prime_power_basis(int m, int64 ell, int e);

    Curve base_;
    TorsionCaps caps_;
    int64 trace_ = 0;
    std::map<int, std::shared_ptr<const Curve>> curves_;
    std::map<int64, int> torsion_degree_;
    std::map<std::pair<int64, int>, BasisSlot> bases_;
    struct ClosureEntry {
        std::vector<Point> points;
        bool full = false;
    };
    std::map<std::tuple<int, int64, int>, ClosureEntry> closures_;
};

// process-wide memo of deterministic extension fields F_{p^m}
std::shared_ptr<const FiniteField> shared_field(int64 p, int m);

// closure of a point set under the group law (small subgroups only)
std::vector<Point> subgroup_closure(const Curve& e, const std::vector<Point>& gens,
                                    std::size_t limit);

}  // namespace ellhom
