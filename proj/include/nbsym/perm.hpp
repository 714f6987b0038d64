#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace nbsym {

// Permutation of {0..n-1}. Cycle notation in strings is 1-based, e.g. "(1,2,3)(4,5)".
struct Perm {
    std::vector<int> img;

    Perm() = default;
    explicit Perm(int n) : img(n) { std::iota(img.begin(), img.end(), 0); }
    explicit Perm(std::vector<int> images) : img(std::move(images)) {
        std::vector<char> seen(img.size(), 0);
        for (int v : img) {
            if (v < 0 || v >= int(img.size()) || seen[v])
                throw std::invalid_argument("permutation images not a bijection");
            seen[v] = 1;
        }
    }

    int n() const { return int(img.size()); }
    int operator()(int i) const { return img[i]; }

    bool is_identity() const {
        for (int i = 0; i < n(); ++i)
            if (img[i] != i) return false;
        return true;
    }

    // (a.compose(b))(i) = a(b(i))
    Perm compose(const Perm& b) const {
        if (n() != b.n()) throw std::invalid_argument("permutation size mismatch");
        std::vector<int> r(img.size());
        for (int i = 0; i < n(); ++i) r[i] = img[b.img[i]];
        Perm p; p.img = std::move(r); return p;
    }

    Perm inverse() const {
        std::vector<int> r(img.size());
        for (int i = 0; i < n(); ++i) r[img[i]] = i;
        Perm p; p.img = std::move(r); return p;
    }

    friend bool operator==(const Perm& a, const Perm& b) { return a.img == b.img; }
    friend bool operator!=(const Perm& a, const Perm& b) { return !(a == b); }

    static Perm from_cycles(const std::string& s, int n);
    std::string to_cycles() const;
};

inline Perm Perm::from_cycles(const std::string& s, int n) {
    Perm p(n);
    size_t i = 0;
    auto skip_ws = [&] { while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i; };
    skip_ws();
    while (i < s.size()) {
        if (s[i] != '(') throw std::invalid_argument("expected '(' in cycle string: " + s);
        ++i;
        std::vector<int> cyc;
        skip_ws();
        while (i < s.size() && s[i] != ')') {
            size_t j = i;
            while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
            if (j == i) throw std::invalid_argument("expected index in cycle string: " + s);
            int v = std::stoi(s.substr(i, j - i));
            if (v < 1 || v > n) throw std::invalid_argument("cycle index out of range: " + s);
            cyc.push_back(v - 1);
            i = j;
            skip_ws();
            if (i < s.size() && (s[i] == ',' || s[i] == ' ')) { ++i; skip_ws(); }
        }
        if (i == s.size()) throw std::invalid_argument("unterminated cycle: " + s);
        ++i;
        for (size_t k = 0; k < cyc.size(); ++k) {
            int from = cyc[k], to = cyc[(k + 1) % cyc.size()];
            if (p.img[from] != from) throw std::invalid_argument("repeated index in cycles: " + s);
            p.img[from] = to;
        }
        skip_ws();
    }
    return p;
}

inline std::string Perm::to_cycles() const {
    std::string out;
    std::vector<char> seen(img.size(), 0);
    for (int i = 0; i < n(); ++i) {
        if (seen[i] || img[i] == i) { seen[i] = 1; continue; }
        out += "(";
        int j = i;
        bool first = true;
        while (!seen[j]) {
            seen[j] = 1;
            if (!first) out += ",";
            out += std::to_string(j + 1);
            first = false;
            j = img[j];
        }
        out += ")";
    }
    if (out.empty()) out = "()";
    return out;
}

} // namespace nbsym
