#include "ellhom/curve.hpp"

#include <cmath>

namespace ellhom {

Curve::Curve(std::shared_ptr<const FiniteField> field, FieldElement a, FieldElement b)
    : field_(std::move(field)), a_(std::move(a)), b_(std::move(b)) {
    const FiniteField& f = *field_;
    // 4A^3 + 27B^2 != 0
    FieldElement disc = f.add(f.mul(f.from_int(4), f.mul(a_, f.mul(a_, a_))),
                              f.mul(f.from_int(27), f.mul(b_, b_)));
    if (f.is_zero(disc)) fail(ErrorCode::precondition, "singular curve: 4A^3 + 27B^2 = 0");
}

Curve Curve::over_prime(int64 p, int64 a, int64 b) {
    auto f = std::make_shared<FiniteField>(FiniteField::prime(p));
    FieldElement fa = f->from_int(a), fb = f->from_int(b);
    return Curve(std::move(f), std::move(fa), std::move(fb));
}

FieldElement Curve::j_invariant() const {
    const FiniteField& f = *field_;
    FieldElement a3 = f.mul(f.from_int(4), f.mul(a_, f.mul(a_, a_)));
    FieldElement denom = f.add(a3, f.mul(f.from_int(27), f.mul(b_, b_)));
    return f.div(f.mul(f.from_int(1728), a3), denom);
}

bool Curve::same_curve(const Curve& o) const {
    return field_->p() == o.field_->p() && field_->modulus() == o.field_->modulus() &&
           a_ == o.a_ && b_ == o.b_;
}

Curve Curve::base_change(std::shared_ptr<const FiniteField> ext) const {
    if (field_->degree() != 1) fail(ErrorCode::internal, "base change only from the prime field");
    if (ext->p() != field_->p()) fail(ErrorCode::internal, "base change must preserve p");
    FieldElement a = ext->from_int(a_[0]);
    FieldElement b = ext->from_int(b_[0]);
    return Curve(std::move(ext), std::move(a), std::move(b));
}

bool Curve::on_curve(const Point& pt) const {
    if (pt.inf) return true;
    const FiniteField& f = *field_;
    FieldElement lhs = f.mul(pt.y, pt.y);
    FieldElement rhs = f.add(f.mul(pt.x, f.mul(pt.x, pt.x)), f.add(f.mul(a_, pt.x), b_));
    return lhs == rhs;
}

Point Curve::neg(const Point& pt) const {
    if (pt.inf) return pt;
    return Point::affine(pt.x, field_->neg(pt.y));
}

Point Curve::add(const Point& p, const Point& q) const {
    if (p.inf) return q;
    if (q.inf) return p;
    const FiniteField& f = *field_;
    if (p.x == q.x) {
        if (f.is_zero(f.add(p.y, q.y))) return Point::infinity();
        // tangent: lambda = (3x^2 + A) / 2y
        FieldElement num = f.add(f.mul(f.from_int(3), f.mul(p.x, p.x)), a_);
        FieldElement lam = f.div(num, f.mul(f.from_int(2), p.y));
        FieldElement x3 = f.sub(f.mul(lam, lam), f.add(p.x, q.x));
        FieldElement y3 = f.sub(f.mul(lam, f.sub(p.x, x3)), p.y);
        return Point::affine(std::move(x3), std::move(y3));
    }
    FieldElement lam = f.div(f.sub(q.y, p.y), f.sub(q.x, p.x));
    FieldElement x3 = f.sub(f.mul(lam, lam), f.add(p.x, q.x));
    FieldElement y3 = f.sub(f.mul(lam, f.sub(p.x, x3)), p.y);
    return Point::affine(std::move(x3), std::move(y3));
}

Point Curve::mul(BigInt k, const Point& pt) const {
    Point base = pt;
    if (k < 0) {
        base = neg(base);
        k = -k;
    }
    Point acc = Point::infinity();
    while (k > 0) {
        if ((k & 1) != 0) acc = add(acc, base);
        base = add(base, base);
        k >>= 1;
    }
    return acc;
}

Point Curve::frobenius_point(const Point& pt) const {
    if (pt.inf) return pt;
    return Point::affine(field_->frobenius(pt.x), field_->frobenius(pt.y));
}

std::string Curve::point_key(const Point& pt) const {
    if (pt.inf) return "O";
    return field_->key(pt.x) + field_->key(pt.y);
}

CurveCount count_points(const Curve& e) {
    const FiniteField& f = e.field();
    if (f.degree() != 1) fail(ErrorCode::precondition, "count_points wants a prime-field curve");
    int64 p = f.p();
    // chi(t) = legendre symbol table
    std::vector<int> chi(p, -1);
    chi[0] = 0;
    for (int64 t = 1; t <= (p - 1) / 2; ++t) chi[mul_mod(t, t, p)] = 1;
    int64 a = e.A()[0], b = e.B()[0];
    int64 count = 1;  // infinity
    for (int64 x = 0; x < p; ++x) {
        int64 fx = mod_reduce(mul_mod(x, mul_mod(x, x, p), p) + mul_mod(a, x, p) + b, p);
        count += 1 + chi[fx];
    }
    int64 trace = p + 1 - count;
    double bound = 2.0 * std::sqrt(static_cast<double>(p));
    if (std::llabs(trace) > static_cast<int64>(bound) + 1)
        fail(ErrorCode::internal, "Hasse bound violated");
    return {count, trace};
}

BigInt trace_over_extension(int64 trace, int64 p, int k) {
    BigInt t0 = 2, t1 = trace;
    if (k == 0) return t0;
    for (int j = 2; j <= k; ++j) {
        BigInt t2 = trace * t1 - p * t0;
        t0 = t1;
        t1 = t2;
    }
    return t1;
}

BigInt order_over_extension(int64 trace, int64 p, int k) {
    return boost::multiprecision::pow(BigInt(p), k) + 1 - trace_over_extension(trace, p, k);
}

std::optional<int64> fp_isomorphism(const Curve& e1, const Curve& e2) {
    const FiniteField& f = e1.field();
    if (f.degree() != 1 || e2.field().degree() != 1 || f.p() != e2.field().p())
        fail(ErrorCode::precondition, "twist test wants prime-field curves over the same p");
    int64 p = f.p();
    int64 a1 = e1.A()[0], b1 = e1.B()[0];
    int64 a2 = e2.A()[0], b2 = e2.B()[0];
    for (int64 u = 1; u < p; ++u) {
        int64 u2 = mul_mod(u, u, p);
        int64 u4 = mul_mod(u2, u2, p);
        int64 u6 = mul_mod(u4, u2, p);
        if (mul_mod(u4, a1, p) == a2 && mul_mod(u6, b1, p) == b2) return u;
    }
    return std::nullopt;
}

std::vector<Point> enumerate_all_points(const Curve& e) {
    const FiniteField& f = e.field();
    BigInt q = f.order();
    if (q > 100000000) fail(ErrorCode::cap_exceeded, "field too large for full enumeration");
    std::vector<Point> pts;
    pts.push_back(Point::infinity());
    for (BigInt code = 0; code < q; ++code) {
        FieldElement x = f.element_from_code(code);
        FieldElement fx = f.add(f.mul(x, f.mul(x, x)), f.add(f.mul(e.A(), x), e.B()));
        if (f.is_zero(fx)) {
            pts.push_back(Point::affine(x, f.zero()));
            continue;
        }
        auto r = f.sqrt(fx);
        if (!r) continue;
        pts.push_back(Point::affine(x, *r));
        pts.push_back(Point::affine(x, f.neg(*r)));
    }
    return pts;
}

}  // namespace ellhom
