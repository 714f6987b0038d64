#pragma once

#include <vector>

#include "nbsym/rational.hpp"

namespace nbsym {

// Element of O(2) acting on the time circle R/TZ, stored exactly.
//   rotation c:   t -> t + cT
//   reflection c: t -> 2cT - t   (axis parameter; c and c + 1/2 give the same map)
struct TimeTransform {
    enum class Kind { rotation, reflection };
    Kind kind = Kind::rotation;
    Rational c;

    static TimeTransform rotation(const Rational& f) {
        TimeTransform t; t.kind = Kind::rotation; t.c = f.mod1(); return t;
    }
    static TimeTransform reflection(const Rational& f) {
        TimeTransform t; t.kind = Kind::reflection; t.c = canon_axis(f); return t;
    }
    static TimeTransform identity() { return rotation(Rational(0)); }

    // axis parameter reduced to [0, 1/2)
    static Rational canon_axis(const Rational& f) {
        Rational r = f.mod1();
        if (!(r < Rational(1, 2))) r = r - Rational(1, 2);
        return r;
    }

    bool is_rotation() const { return kind == Kind::rotation; }
    bool is_identity() const { return is_rotation() && c.is_zero(); }

    // composition a.compose(b) = "apply b first, then a"
    TimeTransform compose(const TimeTransform& b) const {
        if (is_rotation() && b.is_rotation()) return rotation(c + b.c);
        if (is_rotation()) return reflection(b.c + c * Rational(1, 2));
        if (b.is_rotation()) return reflection(c - b.c * Rational(1, 2));
        return rotation((c - b.c) * Rational(2));
    }

    TimeTransform inverse() const {
        if (is_rotation()) return rotation(-c);
        return *this;
    }

    friend bool operator==(const TimeTransform& a, const TimeTransform& b) {
        return a.kind == b.kind && a.c == b.c;
    }
    friend bool operator!=(const TimeTransform& a, const TimeTransform& b) { return !(a == b); }
    friend bool operator<(const TimeTransform& a, const TimeTransform& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.c < b.c;
    }

    double apply(double t, double T) const {
        if (is_rotation()) return t + c.value() * T;
        return 2.0 * c.value() * T - t;
    }

    int order() const {
        if (!is_rotation()) return 2;
        return c.is_zero() ? 1 : int(c.mod1().den);
    }

    // fixed time fractions in [0, 1); empty for nontrivial rotations
    std::vector<Rational> fixed_fractions() const {
        if (is_rotation()) return {};
        return {c.mod1(), (c + Rational(1, 2)).mod1()};
    }

    std::string str() const {
        if (is_rotation()) return "rot(" + c.str() + ")";
        return "ref(" + c.str() + ")";
    }
};

} // namespace nbsym
