#include "ellhom/torsion.hpp"

#include <algorithm>
#include <set>

namespace ellhom {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

Point sample_point(const Curve& ec, SplitMix64& rng) {
    const FiniteField& f = ec.field();
    for (int tries = 0; tries < 65536; ++tries) {
        FieldElement x(f.degree());
        for (int i = 0; i < f.degree(); ++i) x[i] = rng.below(f.p());
        FieldElement fx = f.add(f.mul(x, f.mul(x, x)), f.add(f.mul(ec.A(), x), ec.B()));
        if (f.is_zero(fx)) return Point::affine(std::move(x), f.zero());
        if (!f.is_square(fx)) continue;
        FieldElement y = *f.sqrt(fx);
        if ((rng.next() & 1) != 0) y = f.neg(y);
        return Point::affine(std::move(x), std::move(y));
    }
    fail(ErrorCode::internal, "point sampling failed");
}

int order_exponent(const Curve& ec, Point s, int64 ell, int max_steps) {
    int j = 0;
    while (!s.inf) {
        s = ec.mul(ell, s);
        if (++j > max_steps) fail(ErrorCode::internal, "order exponent out of range");
    }
    return j;
}

// grow a subgroup closure by one new element (with all its multiples)
void extend_closure(const Curve& ec, std::map<std::string, Point>& cl, const Point& s,
                    std::size_t limit) {
    std::vector<Point> mults;
    Point t = s;
    while (!t.inf) {
        mults.push_back(t);
        t = ec.add(t, s);
        if (mults.size() > limit) fail(ErrorCode::cap_exceeded, "subgroup closure too large");
    }
    std::vector<Point> snapshot;
    snapshot.reserve(cl.size());
    for (const auto& kv : cl) snapshot.push_back(kv.second);
    for (const Point& base : snapshot)
        for (const Point& m : mults) {
            Point np = ec.add(base, m);
            cl.emplace(ec.point_key(np), np);
            if (cl.size() > limit) fail(ErrorCode::cap_exceeded, "subgroup closure too large");
        }
}

int64 ipow(int64 b, int e) {
    int64 r = 1;
    while (e-- > 0) r *= b;
    return r;
}

}  // namespace

std::shared_ptr<const FiniteField> shared_field(int64 p, int m) {
    static std::map<std::pair<int64, int>, std::shared_ptr<const FiniteField>> cache;
    auto key = std::make_pair(p, m);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto f = std::make_shared<const FiniteField>(FiniteField::extension(p, m));
    cache.emplace(key, f);
    return f;
}

std::vector<Point> subgroup_closure(const Curve& e, const std::vector<Point>& gens,
                                    std::size_t limit) {
    std::map<std::string, Point> cl;
    cl.emplace(e.point_key(Point::infinity()), Point::infinity());
    for (const Point& g : gens) {
        if (cl.count(e.point_key(g))) continue;
        extend_closure(e, cl, g, limit);
    }
    std::vector<Point> out;
    out.reserve(cl.size());
    for (const auto& kv : cl) out.push_back(kv.second);
    return out;
}

TorsionContext::TorsionContext(Curve base, TorsionCaps caps)
    : base_(std::move(base)), caps_(caps) {
    if (base_.field().degree() != 1)
        fail(ErrorCode::precondition, "torsion context wants a curve over F_p");
    trace_ = count_points(base_).trace;
}

BigInt TorsionContext::order_ext(int m) const {
    return order_over_extension(trace_, p(), m);
}

std::shared_ptr<const FiniteField> TorsionContext::extension_field(int m) {
    return shared_field(p(), m);
}

std::shared_ptr<const Curve> TorsionContext::curve_over(int m) {
    auto it = curves_.find(m);
    if (it != curves_.end()) return it->second;
    std::shared_ptr<const Curve> c;
    if (m == 1)
        c = std::make_shared<const Curve>(base_);
    else
        c = std::make_shared<const Curve>(base_.base_change(extension_field(m)));
    curves_.emplace(m, c);
    return c;
}

std::vector<Point> TorsionContext::rational_prime_power_torsion(int m, int64 ell, int e,
                                                                bool& full) {
    auto key = std::make_tuple(m, ell, e);
    auto it = closures_.find(key);
    if (it != closures_.end()) {
        full = it->second.full;
        return it->second.points;
    }
    auto ec = curve_over(m);
    BigInt n_points = order_ext(m);
    int v = 0;
    BigInt cof = n_points;
    while (cof % ell == 0) {
        cof /= ell;
        ++v;
    }
    int64 target = ipow(ell, 2 * e);
    std::map<std::string, Point> cl;
    cl.emplace(ec->point_key(Point::infinity()), Point::infinity());

    if (2 * e <= v) {
        std::uint64_t seed = 0xE11C0DEULL;
        seed = mix(seed, static_cast<std::uint64_t>(p()));
        seed = mix(seed, static_cast<std::uint64_t>(base_.A()[0]));
        seed = mix(seed, static_cast<std::uint64_t>(base_.B()[0]));
        seed = mix(seed, static_cast<std::uint64_t>(m));
        seed = mix(seed, static_cast<std::uint64_t>(ell));
        seed = mix(seed, static_cast<std::uint64_t>(e));
        SplitMix64 rng(seed);
        int stall = 0;
        int stall_limit = 64 + static_cast<int>(ipow(ell, e));
        for (int s = 0; s < caps_.sample_budget; ++s) {
            if (static_cast<int64>(cl.size()) >= target) break;
            if (stall > stall_limit) break;
            Point pt = sample_point(*ec, rng);
            Point red = ec->mul(cof, pt);
            int j = order_exponent(*ec, red, ell, v + 1);
            if (j > e) red = ec->mul(boost::multiprecision::pow(BigInt(ell), j - e), red);
            if (cl.count(ec->point_key(red))) {
                ++stall;
                continue;
            }
            stall = 0;
            extend_closure(*ec, cl, red, static_cast<std::size_t>(target));
        }
    }
    ClosureEntry entry;
    entry.full = static_cast<int64>(cl.size()) == target;
    for (const auto& kv : cl) entry.points.push_back(kv.second);
    full = entry.full;
    auto [pos, unused] = closures_.emplace(key, std::move(entry));
    (void)unused;
    return pos->second.points;
}

int TorsionContext::full_torsion_degree(int64 n) {
    if (n < 1) fail(ErrorCode::precondition, "torsion level must be positive");
    if (n == 1) return 1;
    if (gcd64(n, p()) != 1) fail(ErrorCode::precondition, "torsion level must be prime to p");
    auto it = torsion_degree_.find(n);
    if (it != torsion_degree_.end()) return it->second;

    std::vector<std::pair<int64, int>> factors;
    int64 rem = n;
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

    for (int m = 1; m <= caps_.max_degree; ++m) {
        BigInt nm = order_ext(m);
        if (nm % (BigInt(n) * n) != 0) continue;
        BigInt qm1 = boost::multiprecision::pow(BigInt(p()), m) - 1;
        if (qm1 % n != 0) continue;
        bool ok = true;
        for (const auto& [ell, e] : factors) {
            bool full = false;
            rational_prime_power_torsion(m, ell, e, full);
            if (!full) {
                ok = false;
                break;
            }
        }
        if (ok) {
            torsion_degree_[n] = m;
            return m;
        }
    }
    fail(ErrorCode::cap_exceeded, "E[" + std::to_string(n) + "] not reachable within degree cap");
}

std::pair<Point, Point> TorsionContext::prime_power_basis(int m, int64 ell, int e) {
    bool full = false;
    std::vector<Point> pts = rational_prime_power_torsion(m, ell, e, full);
    if (!full) fail(ErrorCode::internal, "prime-power torsion not fully rational here");
    auto ec = curve_over(m);
    Point q_pt;
    bool found_q = false;
    for (const Point& pt : pts)
        if (order_exponent(*ec, pt, ell, e) == e) {
            q_pt = pt;
            found_q = true;
            break;
        }
    if (!found_q) fail(ErrorCode::internal, "no element of maximal order in torsion closure");
    // multiples of ell^{e-1} * Q, the small subgroup a candidate P must avoid
    Point qe = ec->mul(boost::multiprecision::pow(BigInt(ell), e - 1), q_pt);
    std::set<std::string> line;
    Point t = Point::infinity();
    for (int64 i = 0; i < ell; ++i) {
        line.insert(ec->point_key(t));
        t = ec->add(t, qe);
    }
    for (const Point& pt : pts) {
        if (order_exponent(*ec, pt, ell, e) != e) continue;
        Point pe = ec->mul(boost::multiprecision::pow(BigInt(ell), e - 1), pt);
        if (!line.count(ec->point_key(pe))) return {pt, q_pt};
    }
    fail(ErrorCode::internal, "no independent basis pair in torsion closure");
}

TorsionContext::BasisSlot& TorsionContext::basis_slot(int64 n, int m) {
    auto key = std::make_pair(n, m);
    auto it = bases_.find(key);
    if (it != bases_.end()) return it->second;

    BasisSlot slot;
    slot.basis.n = n;
    slot.basis.ambient_degree = m;
    slot.basis.ext = m == 1 ? base_.field_ptr() : extension_field(m);
    slot.basis.curve = curve_over(m);
    const Curve& ec = *slot.basis.curve;

    if (n == 1) {
        slot.basis.P = Point::infinity();
        slot.basis.Q = Point::infinity();
        slot.dlog.emplace(ec.point_key(Point::infinity()), std::make_pair(0, 0));
        return bases_.emplace(key, std::move(slot)).first->second;
    }

    std::vector<std::pair<int64, int>> factors;
    int64 rem = n;
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

    Point P = Point::infinity(), Q = Point::infinity();
    for (const auto& [ell, e] : factors) {
        auto [pl, ql] = prime_power_basis(m, ell, e);
        P = ec.add(P, pl);
        Q = ec.add(Q, ql);
    }
    slot.basis.P = P;
    slot.basis.Q = Q;

    // full discrete-log table, also certifies independence
    Point row = Point::infinity();
    for (int64 i = 0; i < n; ++i) {
        Point cell = row;
        for (int64 j = 0; j < n; ++j) {
            auto [pos, fresh] = slot.dlog.emplace(ec.point_key(cell), std::make_pair(i, j));
            if (!fresh) fail(ErrorCode::internal, "torsion basis not independent");
            cell = ec.add(cell, Q);
        }
        row = ec.add(row, P);
    }
    return bases_.emplace(key, std::move(slot)).first->second;
}

const TorsionBasis& TorsionContext::basis(int64 n) {
    return basis_slot(n, full_torsion_degree(n)).basis;
}

const TorsionBasis& TorsionContext::basis_at(int64 n, int m) {
    if (n > 1) {
        int m0 = full_torsion_degree(n);
        if (m % m0 != 0)
            fail(ErrorCode::precondition, "ambient degree must be a multiple of the minimal one");
        if (m > caps_.max_degree) fail(ErrorCode::cap_exceeded, "ambient degree above cap");
    }
    return basis_slot(n, m).basis;
}

std::pair<int64, int64> TorsionContext::dlog2(int64 n, int m, const Point& r) {
    BasisSlot& slot = basis_slot(n, m);
    auto it = slot.dlog.find(slot.basis.curve->point_key(r));
    if (it == slot.dlog.end()) fail(ErrorCode::internal, "point outside the expected torsion group");
    return it->second;
}

std::vector<Point> TorsionContext::enumerate_torsion(int64 n) {
    const TorsionBasis& b = basis(n);
    const Curve& ec = *b.curve;
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(n) * n);
    Point row = Point::infinity();
    for (int64 i = 0; i < n; ++i) {
        Point cell = row;
        for (int64 j = 0; j < n; ++j) {
            pts.push_back(cell);
            cell = ec.add(cell, b.Q);
        }
        row = ec.add(row, b.P);
    }
    return pts;
}

Mat2 TorsionContext::frobenius_matrix(int64 n) {
    return frobenius_matrix_at(n, full_torsion_degree(n));
}

Mat2 TorsionContext::frobenius_matrix_at(int64 n, int m) {
    const TorsionBasis& b = basis_at(n, m);
    const Curve& ec = *b.curve;
    auto [a, c] = dlog2(n, m, ec.frobenius_point(b.P));
    auto [bb, d] = dlog2(n, m, ec.frobenius_point(b.Q));
    Mat2 f{n, {a, bb, c, d}};
    if (f.trace() != mod_reduce(trace_, n) || f.det() != mod_reduce(p(), n))
        fail(ErrorCode::internal, "Frobenius matrix violates its characteristic polynomial");
    return f;
}

GroupStructure TorsionContext::group_structure(int m) {
    BigInt q = boost::multiprecision::pow(BigInt(p()), m);
    if (q > caps_.max_enum) fail(ErrorCode::cap_exceeded, "field too large for structure computation");
    BigInt nb = order_ext(m);
    int64 n_pts = static_cast<int64>(nb);
    GroupStructure gs;
    int64 rem = n_pts;
    BigInt d1 = 1;
    for (int64 ell = 2; ell * ell <= rem; ++ell) {
        if (rem % ell) continue;
        int v = 0;
        while (rem % ell == 0) {
            rem /= ell;
            ++v;
        }
        int a = 0;
        for (int j = 1; 2 * j <= v; ++j) {
            if ((q - 1) % boost::multiprecision::pow(BigInt(ell), j) != 0) break;
            bool full = false;
            rational_prime_power_torsion(m, ell, j, full);
            if (!full) break;
            a = j;
        }
        d1 *= boost::multiprecision::pow(BigInt(ell), a);
    }
    // a leftover prime factor has v = 1, contributing nothing to d1
    gs.d1 = d1;
    gs.d2 = nb / d1;
    if (gs.d2 % gs.d1 != 0 || (q - 1) % gs.d1 != 0)
        fail(ErrorCode::internal, "invariant factors inconsistent");
    return gs;
}

TorsionSubgroupDescriptor TorsionContext::mult_image_of_torsion(int64 n, int64 r) {
    const TorsionBasis& b = basis(n);
    const Curve& ec = *b.curve;
    int64 rr = mod_reduce(r, n);
    int64 g = gcd64(n, rr);
    if (rr == 0) g = n;
    int64 n1 = n / g;

    Point rp = ec.mul(rr, b.P), rq = ec.mul(rr, b.Q);
    TorsionSubgroupDescriptor out;
    out.level = n1;
    out.ambient_degree = b.ambient_degree;
    out.generators = {rp, rq};
    out.generator_coords = {{rr, 0}, {0, rr}};

    // image set {i(rP) + j(rQ)} must equal E[n1] = {(n/n1)(iP + jQ)}
    std::set<std::string> image, expected;
    Point row = Point::infinity();
    for (int64 i = 0; i < n; ++i) {
        Point cell = row;
        for (int64 j = 0; j < n; ++j) {
            image.insert(ec.point_key(cell));
            cell = ec.add(cell, rq);
        }
        row = ec.add(row, rp);
    }
    int64 step = n / n1;
    Point p1 = ec.mul(step, b.P), q1 = ec.mul(step, b.Q);
    row = Point::infinity();
    for (int64 i = 0; i < n1; ++i) {
        Point cell = row;
        for (int64 j = 0; j < n1; ++j) {
            expected.insert(ec.point_key(cell));
            cell = ec.add(cell, q1);
        }
        row = ec.add(row, p1);
    }
    if (image != expected) fail(ErrorCode::internal, "r*E[n] differs from E[n/gcd(n,r)]");
    return out;
}

PreimageReport TorsionContext::preimage_image_check(const TorsionSubgroupDescriptor& w,
                                                    int64 multiplier) {
    int64 n = w.level, m = multiplier;
    if (m < 1) fail(ErrorCode::precondition, "multiplier must be positive");
    int64 nm = n * m;
    if (gcd64(nm, p()) != 1) fail(ErrorCode::precondition, "nm must be prime to p");
    const TorsionBasis& big = basis(nm);
    const Curve& ec = *big.curve;

    // level-n basis derived inside the E[nm] world
    Point pn = ec.mul(m, big.P), qn = ec.mul(m, big.Q);
    std::vector<Point> wgens;
    for (auto [i, j] : w.generator_coords)
        wgens.push_back(ec.add(ec.mul(i, pn), ec.mul(j, qn)));
    std::vector<Point> wpts = subgroup_closure(ec, wgens, static_cast<std::size_t>(n) * n);
    std::set<std::string> wset;
    for (const Point& pt : wpts) wset.insert(ec.point_key(pt));

    PreimageReport rep;
    rep.level_n = n;
    rep.multiplier_m = m;
    rep.w_order = wpts.size();

    std::vector<Point> preimage;
    std::set<std::string> image;
    Point row = Point::infinity();
    for (int64 i = 0; i < nm; ++i) {
        Point cell = row;
        for (int64 j = 0; j < nm; ++j) {
            Point mx = ec.mul(m, cell);
            if (wset.count(ec.point_key(mx))) {
                preimage.push_back(cell);
                image.insert(ec.point_key(mx));
            }
            cell = ec.add(cell, big.Q);
        }
        row = ec.add(row, big.P);
    }
    rep.preimage_order = preimage.size();
    rep.order_formula_holds = rep.preimage_order == rep.w_order * m * m;
    rep.image_is_w = image == wset;

    // E[m] = (n)*E[nm] sits inside the preimage of {O}
    std::set<std::string> preset;
    for (const Point& pt : preimage) preset.insert(ec.point_key(pt));
    bool contains = true;
    Point pm = ec.mul(n, big.P), qm = ec.mul(n, big.Q);
    Point r2 = Point::infinity();
    for (int64 i = 0; i < m && contains; ++i) {
        Point cell = r2;
        for (int64 j = 0; j < m && contains; ++j) {
            contains = preset.count(ec.point_key(cell)) > 0;
            cell = ec.add(cell, qm);
        }
        r2 = ec.add(r2, pm);
    }
    rep.contains_m_torsion = contains;
    return rep;
}

}  // namespace ellhom
