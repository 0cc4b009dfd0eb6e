#include "ellhom/isogeny.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace ellhom {

namespace {

// dense polynomials over an extension field, little-endian
using EPoly = std::vector<FieldElement>;

EPoly ep_trim(const FiniteField& f, EPoly a) {
    while (!a.empty() && f.is_zero(a.back())) a.pop_back();
    return a;
}

EPoly ep_mul(const FiniteField& f, const EPoly& a, const EPoly& b) {
    if (a.empty() || b.empty()) return {};
    EPoly r(a.size() + b.size() - 1, f.zero());
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] = f.add(r[i + j], f.mul(a[i], b[j]));
    return r;
}

EPoly ep_add(const FiniteField& f, const EPoly& a, const EPoly& b) {
    EPoly r(std::max(a.size(), b.size()), f.zero());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] = f.add(r[i], b[i]);
    return r;
}

EPoly ep_scale(const FiniteField& f, const EPoly& a, const FieldElement& c) {
    EPoly r = a;
    for (auto& x : r) x = f.mul(x, c);
    return r;
}

std::vector<int64> descend_poly(const FiniteField& f, const EPoly& a) {
    std::vector<int64> out;
    out.reserve(a.size());
    for (const FieldElement& c : a) {
        if (!f.in_prime_field(c))
            fail(ErrorCode::internal, "isogeny coefficients do not descend to F_p");
        out.push_back(c[0]);
    }
    while (!out.empty() && out.back() == 0) out.pop_back();
    return out;
}

std::vector<int64> poly_derivative(const std::vector<int64>& a, int64 p) {
    std::vector<int64> r;
    for (size_t i = 1; i < a.size(); ++i) r.push_back(mul_mod(a[i], static_cast<int64>(i % p), p));
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

std::vector<int64> poly_mul_fp(const std::vector<int64>& a, const std::vector<int64>& b, int64 p) {
    if (a.empty() || b.empty()) return {};
    std::vector<int64> r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + mul_mod(a[i], b[j], p)) % p;
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

std::vector<int64> poly_sub_fp(const std::vector<int64>& a, const std::vector<int64>& b, int64 p) {
    std::vector<int64> r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] = mod_reduce(r[i] - b[i], p);
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

FieldElement poly_eval_ext(const std::vector<int64>& a, const FiniteField& f,
                           const FieldElement& x) {
    FieldElement acc = f.zero();
    for (size_t i = a.size(); i-- > 0;) acc = f.add(f.mul(acc, x), f.from_int(a[i]));
    return acc;
}

int64 point_order_dividing(const Curve& ec, const Point& pt, int64 d) {
    if (!ec.mul(d, pt).inf) fail(ErrorCode::internal, "point order does not divide d");
    int64 o = d;
    int64 rem = d;
    for (int64 q = 2; q * q <= rem; ++q) {
        if (rem % q) continue;
        while (rem % q == 0) rem /= q;
        while (o % q == 0 && ec.mul(o / q, pt).inf) o /= q;
    }
    if (rem > 1)
        while (o % rem == 0 && ec.mul(o / rem, pt).inf) o /= rem;
    return o;
}

int64 carmichael(int64 d) {
    int64 lam = 1;
    for (int64 q = 2; q * q <= d || (d > 1 && q <= d); ++q) {
        if (d % q) continue;
        int e = 0;
        while (d % q == 0) {
            d /= q;
            ++e;
        }
        int64 part;
        if (q == 2)
            part = e == 1 ? 1 : (e == 2 ? 2 : (int64(1) << (e - 2)));
        else {
            part = q - 1;
            for (int i = 1; i < e; ++i) part *= q;
        }
        lam = std::lcm(lam, part);
    }
    return lam;
}

std::shared_ptr<const FiniteField> field_for(const Curve& base, int m) {
    if (m == 1) return base.field_ptr();
    return shared_field(base.field().p(), m);
}

}  // namespace

// ---------------------------------------------------------------------------

Point Isogeny::eval(int ambient_degree, const Point& pt) const {
    if (pt.inf) return pt;
    auto fp = field_for(domain_, ambient_degree);
    const FiniteField& f = *fp;
    FieldElement den = poly_eval_ext(xden_, f, pt.x);
    if (f.is_zero(den)) return Point::infinity();
    FieldElement num = poly_eval_ext(xnum_, f, pt.x);
    FieldElement xv = f.div(num, den);
    FieldElement yv = f.mul(pt.y, f.div(poly_eval_ext(ynum_, f, pt.x), poly_eval_ext(yden_, f, pt.x)));
    return Point::affine(std::move(xv), std::move(yv));
}

Isogeny velu(TorsionContext& ctx, const KernelSubgroup& kernel) {
    const Curve& base = ctx.base();
    int64 p = base.field().p();
    int m = kernel.ambient_degree;
    auto ec = ctx.curve_over(m);
    const FiniteField& f = ec->field();

    if (static_cast<int64>(kernel.points.size()) != kernel.order)
        fail(ErrorCode::precondition, "kernel point list does not match its order");
    std::set<std::string> keys;
    for (const Point& q : kernel.points) {
        if (!ec->on_curve(q)) fail(ErrorCode::precondition, "kernel point not on the curve");
        keys.insert(ec->point_key(q));
    }
    for (const Point& q : kernel.points)
        if (!keys.count(ec->point_key(ec->frobenius_point(q))))
            fail(ErrorCode::precondition, "kernel is not Galois-stable");

    Isogeny iso;
    iso.domain_ = base;
    iso.degree_ = kernel.order;
    iso.kernel_ = kernel;

    if (kernel.order == 1) {
        iso.codomain_ = base;
        iso.xnum_ = {0, 1};
        iso.xden_ = {1};
        iso.ynum_ = {1};
        iso.yden_ = {1};
        return iso;
    }

    // one representative per {Q, -Q}; 2-torsion points stand alone
    std::vector<Point> reps;
    {
        std::set<std::string> used;
        for (const Point& q : kernel.points) {
            if (q.inf) continue;
            std::string k = ec->point_key(q);
            if (used.count(k)) continue;
            used.insert(k);
            used.insert(ec->point_key(ec->neg(q)));
            reps.push_back(q);
        }
    }

    FieldElement a_ext = f.from_int(base.A()[0]);
    FieldElement b_ext = f.from_int(base.B()[0]);
    FieldElement v = f.zero(), w = f.zero();
    EPoly num = {f.zero(), f.one()};  // x
    EPoly den = {f.one()};
    for (const Point& q : reps) {
        FieldElement gx = f.add(f.mul(f.from_int(3), f.mul(q.x, q.x)), a_ext);
        bool two_torsion = f.is_zero(q.y);
        FieldElement tq = two_torsion ? gx : f.add(gx, gx);
        FieldElement uq = two_torsion
                              ? f.zero()
                              : f.mul(f.from_int(4), f.mul(q.y, q.y));
        v = f.add(v, tq);
        w = f.add(w, f.add(uq, f.mul(tq, q.x)));

        // term t/(x-xq) or (t(x-xq)+u)/(x-xq)^2, exact fraction addition
        EPoly lin = {f.neg(q.x), f.one()};
        EPoly tden = two_torsion ? lin : ep_mul(f, lin, lin);
        EPoly tnum;
        if (two_torsion)
            tnum = {tq};
        else
            tnum = {f.add(uq, f.mul(tq, f.neg(q.x))), tq};
        num = ep_add(f, ep_mul(f, num, tden), ep_mul(f, tnum, den));
        den = ep_mul(f, den, tden);
    }
    num = ep_trim(f, num);
    den = ep_trim(f, den);

    FieldElement a_new = f.sub(a_ext, f.mul(f.from_int(5), v));
    FieldElement b_new = f.sub(b_ext, f.mul(f.from_int(7), w));
    if (!f.in_prime_field(a_new) || !f.in_prime_field(b_new))
        fail(ErrorCode::internal, "codomain coefficients do not descend to F_p");
    iso.codomain_ = Curve(base.field_ptr(), base.field().from_int(a_new[0]),
                          base.field().from_int(b_new[0]));

    iso.xnum_ = descend_poly(f, num);
    iso.xden_ = descend_poly(f, den);
    if (static_cast<int64>(iso.xnum_.size()) != kernel.order + 1 ||
        static_cast<int64>(iso.xden_.size()) != kernel.order)
        fail(ErrorCode::internal, "isogeny rational map has unexpected degree");
    // normalized y-map: Y = y * d/dx (num/den)
    std::vector<int64> dn = poly_derivative(iso.xnum_, p);
    std::vector<int64> dd = poly_derivative(iso.xden_, p);
    iso.ynum_ = poly_sub_fp(poly_mul_fp(dn, iso.xden_, p), poly_mul_fp(iso.xnum_, dd, p), p);
    iso.yden_ = poly_mul_fp(iso.xden_, iso.xden_, p);

    // the map must kill the kernel and send a non-kernel point to the codomain
    for (const Point& q : kernel.points)
        if (!iso.eval(m, q).inf) fail(ErrorCode::internal, "isogeny does not kill its kernel");
    return iso;
}

std::vector<KernelSubgroup> stable_cyclic_kernels(TorsionContext& ctx, int64 d) {
    std::vector<KernelSubgroup> out;
    if (d == 1) {
        KernelSubgroup k;
        k.order = 1;
        k.ambient_degree = 1;
        k.generator = Point::infinity();
        k.points = {Point::infinity()};
        k.kernel_poly = {1};
        out.push_back(std::move(k));
        return out;
    }
    if (gcd64(d, ctx.p()) != 1) fail(ErrorCode::precondition, "kernel order must be prime to p");

    std::vector<std::pair<int64, int>> factors;
    int64 rem = d;
    for (int64 q = 2; q * q <= rem; ++q) {
        if (rem % q) continue;
        int e = 0;
        while (rem % q == 0) {
            rem /= q;
            ++e;
        }
        factors.emplace_back(q, e);
    }
    if (rem > 1) factors.emplace_back(rem, 1);

    int mcap = std::min<int64>(ctx.caps().max_degree, carmichael(d));
    std::set<std::vector<int64>> seen;
    for (int m = 1; m <= mcap; ++m) {
        if (ctx.order_ext(m) % d != 0) continue;
        auto ec = ctx.curve_over(m);
        const FiniteField& f = ec->field();
        // rational d-torsion: combine the per-prime-power pieces
        std::map<std::string, Point> tset;
        tset.emplace(ec->point_key(Point::infinity()), Point::infinity());
        for (const auto& [ell, e] : factors) {
            bool full = false;
            std::vector<Point> part = ctx.rational_prime_power_torsion(m, ell, e, full);
            std::map<std::string, Point> next;
            for (const auto& kv : tset)
                for (const Point& q : part) {
                    Point s = ec->add(kv.second, q);
                    next.emplace(ec->point_key(s), s);
                }
            tset = std::move(next);
        }
        for (const auto& kv : tset) {
            const Point& gen = kv.second;
            if (gen.inf) continue;
            if (point_order_dividing(*ec, gen, d) != d) continue;
            // the cyclic subgroup and its stability
            std::vector<Point> pts;
            std::set<std::string> pkeys;
            Point t = Point::infinity();
            for (int64 i = 0; i < d; ++i) {
                pts.push_back(t);
                pkeys.insert(ec->point_key(t));
                t = ec->add(t, gen);
            }
            if (!pkeys.count(ec->point_key(ec->frobenius_point(gen)))) continue;
            // kernel polynomial over F_p
            EPoly poly = {f.one()};
            for (const Point& q : pts)
                if (!q.inf) poly = ep_mul(f, poly, {f.neg(q.x), f.one()});
            std::vector<int64> kp = descend_poly(f, poly);
            if (seen.count(kp)) continue;
            seen.insert(kp);
            KernelSubgroup k;
            k.order = d;
            k.ambient_degree = m;
            k.generator = gen;
            k.points = std::move(pts);
            k.kernel_poly = std::move(kp);
            out.push_back(std::move(k));
        }
    }
    std::sort(out.begin(), out.end(), [](const KernelSubgroup& a, const KernelSubgroup& b) {
        return a.kernel_poly < b.kernel_poly;
    });
    return out;
}

// ---------------------------------------------------------------------------

PointMap PointMap::identity(const Curve& e) {
    PointMap m;
    m.domain_ = e;
    m.codomain_ = e;
    return m;
}

PointMap PointMap::from_isogeny(const Isogeny& iso) {
    PointMap m;
    m.domain_ = iso.domain();
    m.codomain_ = iso.codomain();
    m.degree_ = iso.degree();
    m.stages_.push_back(IsogenyStage{iso});
    return m;
}

PointMap PointMap::scalar_map(const Curve& e, int64 mult) {
    PointMap m;
    m.domain_ = e;
    m.codomain_ = e;
    m.degree_ = BigInt(mult) * mult;
    m.stages_.push_back(ScalarStage{mult});
    return m;
}

PointMap PointMap::then_twist(int64 u, const Curve& target) const {
    PointMap m = *this;
    m.stages_.push_back(TwistStage{u, m.codomain_, target});
    m.codomain_ = target;
    return m;
}

PointMap PointMap::then_frobenius(int power) const {
    PointMap m = *this;
    m.stages_.push_back(FrobeniusStage{power});
    m.degree_ *= boost::multiprecision::pow(BigInt(m.codomain_.field().p()), power);
    if (power > 0) m.separable_ = false;
    return m;
}

PointMap PointMap::then(const PointMap& next) const {
    if (!codomain_.same_curve(next.domain_))
        fail(ErrorCode::precondition, "composition needs matching curves");
    PointMap m = *this;
    for (const Stage& s : next.stages_) m.stages_.push_back(s);
    m.codomain_ = next.codomain_;
    m.degree_ *= next.degree_;
    m.separable_ = m.separable_ && next.separable_;
    return m;
}

Point PointMap::eval(int ambient_degree, const Point& pt0) const {
    Point pt = pt0;
    Curve cur = domain_;
    for (const Stage& s : stages_) {
        if (std::holds_alternative<IsogenyStage>(s)) {
            const Isogeny& iso = std::get<IsogenyStage>(s).iso;
            pt = iso.eval(ambient_degree, pt);
            cur = iso.codomain();
        } else if (std::holds_alternative<TwistStage>(s)) {
            const TwistStage& tw = std::get<TwistStage>(s);
            if (!pt.inf) {
                auto fp = field_for(cur, ambient_degree);
                const FiniteField& f = *fp;
                FieldElement u = f.from_int(tw.u);
                FieldElement u2 = f.mul(u, u);
                pt = Point::affine(f.mul(u2, pt.x), f.mul(f.mul(u2, u), pt.y));
            }
            cur = tw.to;
        } else if (std::holds_alternative<FrobeniusStage>(s)) {
            int power = std::get<FrobeniusStage>(s).power;
            if (!pt.inf) {
                auto fp = field_for(cur, ambient_degree);
                for (int i = 0; i < power; ++i)
                    pt = Point::affine(fp->frobenius(pt.x), fp->frobenius(pt.y));
            }
        } else {
            int64 mult = std::get<ScalarStage>(s).m;
            Curve ext = ambient_degree == 1 ? cur : cur.base_change(field_for(cur, ambient_degree));
            pt = ext.mul(mult, pt);
        }
    }
    return pt;
}

PointMap dual_map(TorsionContext& ctx_domain, TorsionContext& ctx_codomain, const PointMap& u) {
    if (!u.separable()) fail(ErrorCode::precondition, "dual construction wants a separable map");
    int64 d = static_cast<int64>(u.degree());
    if (d == 1) {
        // inverse of the twist chain: u is an isomorphism
        if (auto w = fp_isomorphism(u.codomain(), u.domain())) {
            return PointMap::identity(u.codomain()).then_twist(*w, u.domain());
        }
        fail(ErrorCode::internal, "degree-1 map without an inverse twist");
    }
    const TorsionBasis& b = ctx_domain.basis(d);
    int m = b.ambient_degree;
    Curve cod_ext = m == 1 ? u.codomain() : u.codomain().base_change(field_for(u.codomain(), m));
    Point ip = u.eval(m, b.P), iq = u.eval(m, b.Q);
    std::vector<Point> img = subgroup_closure(cod_ext, {ip, iq}, static_cast<std::size_t>(d) + 1);
    if (static_cast<int64>(img.size()) != d)
        fail(ErrorCode::internal, "image of full torsion has unexpected size");
    Point gen = Point::infinity();
    for (const Point& pt : img)
        if (!pt.inf && point_order_dividing(cod_ext, pt, d) == d) {
            gen = pt;
            break;
        }
    if (gen.inf) fail(ErrorCode::internal, "image subgroup is not cyclic of order d");

    KernelSubgroup k;
    k.order = d;
    k.ambient_degree = m;
    k.generator = gen;
    k.points = img;
    const FiniteField& f = cod_ext.field();
    EPoly poly = {f.one()};
    for (const Point& q : img)
        if (!q.inf) poly = ep_mul(f, poly, {f.neg(q.x), f.one()});
    k.kernel_poly = descend_poly(f, poly);

    Isogeny back = velu(ctx_codomain, k);
    auto tw = fp_isomorphism(back.codomain(), u.domain());
    if (!tw) fail(ErrorCode::internal, "dual codomain is not F_p-isomorphic to the domain");
    return PointMap::from_isogeny(back).then_twist(*tw, u.domain());
}

std::vector<PointMap> isogenies_between(TorsionContext& e, const Curve& target, int64 d) {
    std::vector<PointMap> out;
    for (const KernelSubgroup& k : stable_cyclic_kernels(e, d)) {
        Isogeny iso = velu(e, k);
        if (auto u = fp_isomorphism(iso.codomain(), target))
            out.push_back(PointMap::from_isogeny(iso).then_twist(*u, target));
    }
    return out;
}

// ---------------------------------------------------------------------------

HomElement HomLattice::element(std::vector<int64> coeffs) const {
    if (coeffs.size() != generators.size())
        fail(ErrorCode::precondition, "coefficient count does not match lattice rank");
    HomElement el;
    el.lattice = this;
    el.coeffs = std::move(coeffs);
    return el;
}

BigInt HomLattice::degree_form(const std::vector<int64>& coeffs) const {
    BigInt q = 0;
    for (size_t i = 0; i < coeffs.size(); ++i)
        for (size_t j = 0; j < coeffs.size(); ++j) q += gram[i][j] * coeffs[i] * coeffs[j];
    if (q % 2 != 0) fail(ErrorCode::internal, "Gram form value is odd");
    return q / 2;
}

Point HomElement::eval(int ambient_degree, const Point& pt) const {
    const HomLattice& lat = *lattice;
    Curve cod = ambient_degree == 1
                    ? lat.codomain
                    : lat.codomain.base_change(field_for(lat.codomain, ambient_degree));
    Point acc = Point::infinity();
    for (size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == 0) continue;
        Point img = lat.generators[i].eval(ambient_degree, pt);
        acc = cod.add(acc, cod.mul(coeffs[i], img));
    }
    return acc;
}

bool HomElement::is_zero_map() const {
    for (int64 c : coeffs)
        if (c != 0) return false;
    return true;
}

namespace {

// exact degree of the map `ev` from the domain of ctx, via the action
// determinant of (dual of w0) o ev, CRT'ed over coprime torsion levels.
BigInt measure_degree(TorsionContext& ctx, const PointMap& w0, const PointMap& w0_dual,
                      const std::function<Point(int, const Point&)>& ev, BigInt bound) {
    BigInt d0 = w0.degree();
    BigInt need = d0 * bound + 1;
    static const int64 level_pool[] = {16, 9, 5, 7, 11, 13, 23, 27, 25, 17, 19, 29, 31, 32};
    BigInt modulus = 1;
    BigInt residue = 0;
    for (int64 n : level_pool) {
        if (modulus > need) break;
        if (gcd64(n, ctx.p()) != 1) continue;
        if (boost::multiprecision::gcd(BigInt(n), d0) != 1) continue;
        if (boost::multiprecision::gcd(modulus, BigInt(n)) != 1) continue;
        int m;
        try {
            m = ctx.full_torsion_degree(n);
        } catch (const Error& err) {
            if (err.code() == ErrorCode::cap_exceeded) continue;
            throw;
        }
        const TorsionBasis& b = ctx.basis(n);
        auto through = [&](const Point& pt) { return w0_dual.eval(m, ev(m, pt)); };
        auto [a, c] = ctx.dlog2(n, m, through(b.P));
        auto [bb, dd] = ctx.dlog2(n, m, through(b.Q));
        Mat2 mat{n, {a, bb, c, dd}};
        int64 det = mat.det();
        // CRT accumulate
        BigInt g, s, t;
        // extended gcd over BigInt
        {
            BigInt r0 = modulus, r1 = n, s0 = 1, s1 = 0;
            while (r1 != 0) {
                BigInt q = r0 / r1;
                BigInt tmp = r0 - q * r1;
                r0 = r1;
                r1 = tmp;
                tmp = s0 - q * s1;
                s0 = s1;
                s1 = tmp;
            }
            g = r0;
            s = s0;
        }
        if (g != 1) fail(ErrorCode::internal, "levels not coprime in degree measurement");
        BigInt next_mod = modulus * n;
        // x = residue + modulus * k with x = det (mod n)
        BigInt k = ((BigInt(det) - residue) % n) * s % n;
        k = ((k % n) + n) % n;
        residue = (residue + modulus * k) % next_mod;
        modulus = next_mod;
    }
    if (modulus <= need)
        fail(ErrorCode::cap_exceeded, "not enough torsion levels in cap for degree measurement");
    if (residue % d0 != 0) fail(ErrorCode::internal, "measured degree not divisible by deg(w0)");
    return residue / d0;
}

BigInt isqrt_ceil(const BigInt& v) {
    if (v <= 0) return 0;
    BigInt r = boost::multiprecision::sqrt(v);
    if (r * r < v) ++r;
    return r;
}

}  // namespace

BigInt degree_of_hom(const HomElement& u) {
    const HomLattice& lat = *u.lattice;
    if (u.is_zero_map()) return 0;
    if (!lat.reference) fail(ErrorCode::internal, "lattice has no degree reference map");
    BigInt s = 0;
    for (size_t i = 0; i < u.coeffs.size(); ++i) {
        BigInt c = u.coeffs[i] < 0 ? -u.coeffs[i] : u.coeffs[i];
        s += c * isqrt_ceil(lat.generators[i].degree());
    }
    BigInt bound = (s + 1) * (s + 1);
    auto ev = [&](int m, const Point& pt) { return u.eval(m, pt); };
    return measure_degree(*lat.domain_ctx, lat.reference->first, lat.reference->second, ev, bound);
}

HomLattice hom_lattice(TorsionContext& e, TorsionContext& e2, const Curve& target,
                       int64 degree_bound) {
    HomLattice lat;
    lat.domain_ctx = &e;
    lat.domain = e.base();
    lat.codomain = target;

    bool same = e.base().same_curve(target);
    if (!same && e.trace() != e2.trace()) return lat;  // zero lattice
    if (!e.ordinary() || !e2.ordinary())
        fail(ErrorCode::precondition, "hom lattice wants ordinary curves");

    if (same) {
        PointMap one = PointMap::identity(e.base());
        PointMap frob = PointMap::identity(e.base()).then_frobenius(1);
        lat.generators = {one, frob};
        lat.reference = std::make_pair(one, one);
        lat.rank = 2;
    } else {
        std::vector<PointMap> atoms;
        if (auto u = fp_isomorphism(e.base(), target))
            atoms.push_back(PointMap::identity(e.base()).then_twist(*u, target));
        for (int64 d = 2; d <= degree_bound; ++d)
            for (PointMap& m : isogenies_between(e, target, d)) atoms.push_back(std::move(m));
        if (atoms.empty()) return lat;  // nothing of degree <= bound
        PointMap psi1 = atoms.front();
        PointMap psi1_dual = dual_map(e, e2, psi1);
        lat.reference = std::make_pair(psi1, psi1_dual);

        // second generator: first candidate with a nondegenerate Gram block
        std::vector<PointMap> candidates(atoms.begin() + 1, atoms.end());
        candidates.push_back(psi1.then_frobenius(1));
        BigInt d1 = psi1.degree();
        std::optional<PointMap> psi2;
        BigInt b12 = 0, d2 = 0;
        for (const PointMap& cand : candidates) {
            BigInt dc = cand.degree();
            BigInt bound = (isqrt_ceil(d1) + isqrt_ceil(dc) + 1) * (isqrt_ceil(d1) + isqrt_ceil(dc) + 1);
            auto ev = [&](int m, const Point& pt) {
                Curve cod = m == 1 ? target : target.base_change(field_for(target, m));
                return cod.add(psi1.eval(m, pt), cand.eval(m, pt));
            };
            BigInt dsum = measure_degree(e, psi1, psi1_dual, ev, bound);
            BigInt cross = dsum - d1 - dc;
            BigInt det = 4 * d1 * dc - cross * cross;
            if (det != 0) {
                psi2 = cand;
                b12 = cross;
                d2 = dc;
                break;
            }
        }
        if (!psi2) {
            // rank-1 span: keep the single generator
            lat.generators = {psi1};
            lat.rank = 1;
            lat.gram = {{2 * d1}};
            lat.gram_det = 2 * d1;
            return lat;
        }
        lat.generators = {psi1, *psi2};
        lat.rank = 2;
        lat.gram = {{2 * d1, b12}, {b12, 2 * d2}};
        lat.gram_det = 4 * d1 * d2 - b12 * b12;
        return lat;
    }

    // same-curve case: Gram of (1, pi) measured honestly
    BigInt d1 = 1, d2 = e.p();
    auto ev = [&](int m, const Point& pt) {
        Curve cod = m == 1 ? target : target.base_change(field_for(target, m));
        Point fr = pt;
        if (!fr.inf) {
            auto fp = field_for(target, m);
            fr = Point::affine(fp->frobenius(fr.x), fp->frobenius(fr.y));
        }
        return cod.add(pt, fr);
    };
    BigInt bound = (isqrt_ceil(d1) + isqrt_ceil(d2) + 1) * (isqrt_ceil(d1) + isqrt_ceil(d2) + 1);
    BigInt dsum = measure_degree(e, lat.generators[0], lat.generators[0], ev, bound);
    BigInt cross = dsum - d1 - d2;
    lat.gram = {{2 * d1, cross}, {cross, 2 * d2}};
    lat.gram_det = 4 * d1 * d2 - cross * cross;
    return lat;
}

// ---------------------------------------------------------------------------

namespace {

CoprimeIsoReport induced_matrix_report(TorsionContext& e, TorsionContext& e2, int64 n,
                                       const std::function<Point(int, const Point&)>& ev,
                                       const BigInt& degree) {
    if (gcd64(n, e.p()) != 1) fail(ErrorCode::precondition, "level must be prime to p");
    int m1 = e.full_torsion_degree(n);
    int m2 = e2.full_torsion_degree(n);
    int m = static_cast<int>(std::lcm(m1, m2));
    if (m > e.caps().max_degree) fail(ErrorCode::cap_exceeded, "common ambient degree above cap");
    const TorsionBasis& b1 = e.basis_at(n, m);
    e2.basis_at(n, m);
    auto [a, c] = e2.dlog2(n, m, ev(m, b1.P));
    auto [bb, d] = e2.dlog2(n, m, ev(m, b1.Q));
    CoprimeIsoReport rep;
    rep.level = n;
    rep.matrix = Mat2{n, {a, bb, c, d}};
    rep.invertible = rep.matrix.invertible();
    rep.degree = degree;
    rep.gcd_degree_level = static_cast<int64>(boost::multiprecision::gcd(degree, BigInt(n)));
    rep.biconditional_holds = rep.invertible == (rep.gcd_degree_level == 1);
    return rep;
}

}  // namespace

CoprimeIsoReport coprime_iso_check(TorsionContext& e, TorsionContext& e2, const PointMap& u,
                                   int64 n) {
    auto ev = [&](int m, const Point& pt) { return u.eval(m, pt); };
    return induced_matrix_report(e, e2, n, ev, u.degree());
}

CoprimeIsoReport coprime_iso_check(TorsionContext& e, TorsionContext& e2, const HomElement& u,
                                   int64 n, const BigInt& known_degree) {
    auto ev = [&](int m, const Point& pt) { return u.eval(m, pt); };
    return induced_matrix_report(e, e2, n, ev, known_degree);
}

CrtCombineResult crt_combine(TorsionContext& e, TorsionContext& e2, const HomLattice& lattice,
                             const std::vector<std::pair<int64, std::vector<int64>>>& candidates,
                             int64 n) {
    std::vector<int64> primes;
    {
        int64 rem = n;
        for (int64 q = 2; q * q <= rem; ++q) {
            if (rem % q) continue;
            primes.push_back(q);
            while (rem % q == 0) rem /= q;
        }
        if (rem > 1) primes.push_back(rem);
    }
    for (int64 ell : primes) {
        bool covered = false;
        for (const auto& [l, c] : candidates) covered |= l == ell;
        if (!covered)
            fail(ErrorCode::precondition, "no candidate for prime " + std::to_string(ell));
    }
    for (const auto& [ell, coeffs] : candidates) {
        BigInt deg = lattice.degree_form(coeffs);
        if (boost::multiprecision::gcd(deg, BigInt(ell)) != 1)
            fail(ErrorCode::precondition, "candidate degree not coprime to its prime");
    }

    size_t rank = lattice.generators.size();
    int64 big = 1;
    for (int64 ell : primes) big *= ell;
    std::vector<int64> coeffs(rank, 0);
    for (size_t i = 0; i < rank; ++i) {
        int64 r = 0, m = 1;
        for (int64 ell : primes) {
            int64 ci = 0;
            for (const auto& [l, c] : candidates)
                if (l == ell) ci = mod_reduce(c[i], ell);
            r = crt_pair(r, m, ci, ell);
            m *= ell;
        }
        // centered representative keeps the combined degree small
        if (r > big / 2) r -= big;
        coeffs[i] = r;
    }

    CrtCombineResult res{lattice.element(coeffs), {}};
    BigInt deg = lattice.degree_form(coeffs);
    for (int64 ell : primes) {
        CoprimeIsoReport rep = coprime_iso_check(e, e2, res.element, ell, deg);
        if (!rep.invertible)
            fail(ErrorCode::internal,
                 "CRT combination is not invertible at " + std::to_string(ell) +
                     " (contradicts the composition lemma)");
        res.prime_checks.push_back(std::move(rep));
    }
    return res;
}

}  // namespace ellhom
