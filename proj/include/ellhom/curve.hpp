#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ellhom/arith.hpp"

namespace ellhom {

struct Point {
    bool inf = true;
    FieldElement x, y;

    static Point infinity() { return Point{}; }
    static Point affine(FieldElement px, FieldElement py) {
        return Point{false, std::move(px), std::move(py)};
    }
};

// y^2 = x^3 + Ax + B over a finite field of characteristic > 3.
class Curve {
public:
    Curve(std::shared_ptr<const FiniteField> field, FieldElement a, FieldElement b);
    static Curve over_prime(int64 p, int64 a, int64 b);

    const FiniteField& field() const { return *field_; }
    std::shared_ptr<const FiniteField> field_ptr() const { return field_; }
    const FieldElement& A() const { return a_; }
    const FieldElement& B() const { return b_; }

    FieldElement j_invariant() const;
    bool same_curve(const Curve& o) const;

    // the same equation viewed over an extension of the prime field
    Curve base_change(std::shared_ptr<const FiniteField> ext) const;

    bool on_curve(const Point& pt) const;
    Point neg(const Point& pt) const;
    Point add(const Point& p, const Point& q) const;
    Point mul(BigInt k, const Point& pt) const;
    // coordinate-wise x -> x^p; maps E to itself since A, B are in F_p
    Point frobenius_point(const Point& pt) const;

    std::string point_key(const Point& pt) const;

private:
    std::shared_ptr<const FiniteField> field_;
    FieldElement a_, b_;
};

struct CurveCount {
    int64 order;
    int64 trace;
};

// #E(F_p) by exhaustive x-scan; requires a prime-field curve.
CurveCount count_points(const Curve& e);

// #E(F_{p^k}) from the trace via t_j = a_p t_{j-1} - p t_{j-2}.
BigInt order_over_extension(int64 trace, int64 p, int k);
BigInt trace_over_extension(int64 trace, int64 p, int k);

// E ~ E' over F_p iff A' = u^4 A, B' = u^6 B for a unit u; returns u.
std::optional<int64> fp_isomorphism(const Curve& e1, const Curve& e2);

// all points, by exhaustive x-scan (small fields only; used by oracles too)
std::vector<Point> enumerate_all_points(const Curve& e);

}  // namespace ellhom
