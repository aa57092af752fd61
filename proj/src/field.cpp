#include "pmt/field.hpp"

#include <array>
#include <map>
#include <mutex>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "pmt/errors.hpp"

namespace pmt {

namespace {

elem_t bit(unsigned i) { return elem_t(1) << i; }

elem_t bits_of(std::initializer_list<unsigned> exps) {
    elem_t v = 0;
    for (unsigned e : exps) v |= bit(e);
    return v;
}

// Polynomial remainder over GF(2), 64-bit operands.
std::uint64_t gf2_mod(std::uint64_t a, std::uint64_t m) {
    const int dm = 63 - __builtin_clzll(m);
    while (a != 0) {
        const int da = 63 - __builtin_clzll(a);
        if (da < dm) break;
        a ^= m << (da - dm);
    }
    return a;
}

}  // namespace

std::string elem_to_hex(elem_t v) {
    static const char* digits = "0123456789abcdef";
    if (v == 0) return "0";
    std::string s;
    while (v != 0) {
        s.insert(s.begin(), digits[static_cast<unsigned>(v & 0xf)]);
        v >>= 4;
    }
    return s;
}

elem_t elem_from_hex(const std::string& hex) {
    std::string h = hex;
    if (h.size() > 2 && h[0] == '0' && (h[1] == 'x' || h[1] == 'X')) h = h.substr(2);
    if (h.empty() || h.size() > 32) throw UsageError("bad hex field value: '" + hex + "'");
    elem_t v = 0;
    for (char c : h) {
        unsigned d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else throw UsageError("bad hex field value: '" + hex + "'");
        v = (v << 4) | d;
    }
    return v;
}

bool is_irreducible_small(std::uint64_t poly) {
    if (poly < 2) return false;
    const int deg = 63 - __builtin_clzll(poly);
    if (deg == 1) return true;
    // every candidate divisor of degree d lies in [2^d, 2^(d+1))
    for (int d = 1; d <= deg / 2; ++d)
        for (std::uint64_t q = std::uint64_t(1) << d; q < (std::uint64_t(2) << d); ++q)
            if (gf2_mod(poly, q) == 0) return false;
    return true;
}

elem_t FieldSpec::builtin_reduction(unsigned lambda) {
    switch (lambda) {
        case 1: return bits_of({0});
        case 2: return bits_of({1, 0});
        case 3: return bits_of({1, 0});
        case 4: return bits_of({1, 0});
        case 8: return bits_of({4, 3, 1, 0});
        case 16: return bits_of({12, 3, 1, 0});
        case 32: return bits_of({7, 3, 2, 0});
        case 64: return bits_of({4, 3, 1, 0});
        case 104: return bits_of({4, 3, 1, 0});
        case 128: return bits_of({7, 2, 1, 0});
        default: break;
    }
    if (lambda >= 1 && lambda <= 32) {
        // numerically smallest irreducible of this degree
        const std::uint64_t top = std::uint64_t(1) << lambda;
        for (std::uint64_t low = 1; low < top; low += 2)
            if (is_irreducible_small(top | low)) return low;
    }
    throw UsageError("no built-in reduction polynomial for lambda=" + std::to_string(lambda) +
                     "; pass one explicitly");
}

FieldSpec::FieldSpec(unsigned lambda) : lambda_(lambda), low_(0), mask_(0) {
    if (lambda < 1 || lambda > max_lambda)
        throw UsageError("lambda must be in [1,128], got " + std::to_string(lambda));
    low_ = builtin_reduction(lambda);
    init();
}

FieldSpec::FieldSpec(unsigned lambda, elem_t reduction_low) : lambda_(lambda), low_(reduction_low), mask_(0) {
    if (lambda < 1 || lambda > max_lambda)
        throw UsageError("lambda must be in [1,128], got " + std::to_string(lambda));
    if (lambda < 128 && (reduction_low >> lambda) != 0) {
        // accept the full polynomial with its leading bit as well
        if ((reduction_low >> lambda) == 1) low_ = reduction_low ^ bit(lambda);
        else throw UsageError("reduction polynomial has degree above lambda");
    }
    if ((low_ & 1) == 0) throw UsageError("reduction polynomial divisible by x");
    if (lambda <= 32 && !is_irreducible_small((std::uint64_t(1) << lambda) | static_cast<std::uint64_t>(low_)))
        throw UsageError("reduction polynomial is reducible");
    init();
}

void FieldSpec::init() {
    mask_ = lambda_ == 128 ? ~elem_t(0) : bit(lambda_) - 1;
    if (lambda_ <= table_lambda) build_tables();
}

std::shared_ptr<const FieldSpec> FieldSpec::standard(unsigned lambda) {
    static std::mutex mu;
    static std::map<unsigned, std::shared_ptr<const FieldSpec>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(lambda);
    if (it != cache.end()) return it->second;
    auto f = std::make_shared<const FieldSpec>(lambda);
    cache.emplace(lambda, f);
    return f;
}

std::string FieldSpec::reduction_poly_hex() const {
    if (lambda_ == 128) return "1" + std::string(32 - elem_to_hex(low_).size(), '0') + elem_to_hex(low_);
    return elem_to_hex(low_ | bit(lambda_));
}

std::string FieldSpec::to_json() const {
    nlohmann::json j;
    j["lambda"] = lambda_;
    j["reduction_poly_hex"] = reduction_poly_hex();
    return j.dump();
}

FieldSpec FieldSpec::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const unsigned lambda = j.at("lambda").get<unsigned>();
    std::string hex = j.at("reduction_poly_hex").get<std::string>();
    if (lambda == 128) {
        // 33 hex digits: drop the leading x^128 digit
        if (hex.size() == 33 && hex[0] == '1') hex = hex.substr(1);
        return FieldSpec(lambda, elem_from_hex(hex));
    }
    return FieldSpec(lambda, elem_from_hex(hex));
}

elem_t FieldSpec::mul_slow(elem_t a, elem_t b) const {
    elem_t r = 0;
    const unsigned top = lambda_ - 1;
    for (int i = static_cast<int>(top); i >= 0; --i) {
        const bool carry = ((r >> top) & 1) != 0;
        r = (r << 1) & mask_;
        if (carry) r ^= low_;
        if ((b >> i) & 1) r ^= a;
    }
    return r;
}

elem_t FieldSpec::mul(elem_t a, elem_t b) const {
    if (a == 0 || b == 0) return 0;
    if (has_tables()) return exp_[log_[static_cast<std::size_t>(a)] + log_[static_cast<std::size_t>(b)]];
    return mul_slow(a, b);
}

elem_t FieldSpec::inv_euclid(elem_t a) const {
    using boost::multiprecision::uint256_t;
    auto deg = [](const uint256_t& p) { return static_cast<int>(boost::multiprecision::msb(p)); };
    uint256_t r0 = (uint256_t(1) << lambda_) | uint256_t(low_);
    uint256_t r1 = uint256_t(a);
    uint256_t s0 = 0, s1 = 1;
    // invariant: r_i == s_i * a  (mod the reduction polynomial)
    while (r0 != 0 && r1 != 0) {
        const int d0 = deg(r0), d1 = deg(r1);
        if (d0 >= d1) {
            r0 ^= r1 << (d0 - d1);
            s0 ^= s1 << (d0 - d1);
        } else {
            r1 ^= r0 << (d1 - d0);
            s1 ^= s0 << (d1 - d0);
        }
    }
    uint256_t s = r0 == 0 ? s1 : s0;
    const uint256_t full = (uint256_t(1) << lambda_) | uint256_t(low_);
    while (s != 0 && deg(s) >= static_cast<int>(lambda_)) s ^= full << (deg(s) - static_cast<int>(lambda_));
    const uint256_t lo64 = uint256_t(~std::uint64_t(0));
    const auto lo = static_cast<std::uint64_t>(s & lo64);
    const auto hi = static_cast<std::uint64_t>((s >> 64) & lo64);
    return (elem_t(hi) << 64) | lo;
}

elem_t FieldSpec::inv(elem_t a) const {
    if (a == 0) throw DomainError("inverse of zero");
    if (!contains(a)) throw UsageError("value outside the field");
    if (has_tables()) return exp_[order_ - log_[static_cast<std::size_t>(a)]];
    return inv_euclid(a);
}

void FieldSpec::build_tables() {
    const std::size_t size = std::size_t(1) << lambda_;
    order_ = static_cast<std::uint32_t>(size - 1);
    // find a generator of the multiplicative group
    for (elem_t g = lambda_ == 1 ? 1 : 2; g < size; ++g) {
        std::vector<std::uint16_t> lg(size, 0);
        std::vector<std::uint16_t> ex(3 * std::size_t(order_) + 1, 0);
        elem_t x = 1;
        bool ok = true;
        for (std::uint32_t i = 0; i < order_; ++i) {
            if (i > 0 && x == 1) {
                ok = false;
                break;
            }
            ex[i] = static_cast<std::uint16_t>(x);
            lg[static_cast<std::size_t>(x)] = static_cast<std::uint16_t>(i);
            x = mul_slow(x, g);
        }
        if (!ok || x != 1) continue;
        for (std::uint32_t i = order_; i < 2 * order_; ++i) ex[i] = ex[i - order_];
        log_ = std::move(lg);
        exp_ = std::move(ex);
        return;
    }
    throw ProtocolBug("no generator found; reduction polynomial not irreducible");
}

FieldElement::FieldElement(FieldPtr s, elem_t v) : value(v), spec(std::move(s)) {
    if (!spec) throw UsageError("field element without spec");
    if (!spec->contains(v)) throw UsageError("value has bits at or above lambda");
}

bool FieldElement::operator==(const FieldElement& o) const {
    if (value != o.value) return false;
    if (spec == o.spec) return true;
    return spec && o.spec && *spec == *o.spec;
}

namespace {
const FieldSpec& common_spec(const FieldElement& a, const FieldElement& b) {
    if (!a.spec || !b.spec) throw UsageError("field element without spec");
    if (a.spec != b.spec && *a.spec != *b.spec) throw UsageError("mismatched field specs");
    return *a.spec;
}
}  // namespace

FieldElement add(const FieldElement& a, const FieldElement& b) {
    common_spec(a, b);
    return FieldElement(a.spec, a.value ^ b.value);
}

FieldElement mul(const FieldElement& a, const FieldElement& b) {
    const FieldSpec& f = common_spec(a, b);
    return FieldElement(a.spec, f.mul(a.value, b.value));
}

FieldElement inv(const FieldElement& a) {
    if (!a.spec) throw UsageError("field element without spec");
    return FieldElement(a.spec, a.spec->inv(a.value));
}

FieldElement poly_eval(const std::vector<FieldElement>& coeffs, const FieldElement& x) {
    if (coeffs.empty()) throw UsageError("poly_eval: empty coefficient list");
    for (const auto& c : coeffs) common_spec(c, x);
    elem_t acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = x.spec->mul(acc, x.value) ^ it->value;
    return FieldElement(x.spec, acc);
}

elem_t poly_eval(const FieldSpec& f, const std::vector<elem_t>& coeffs, elem_t x) {
    if (coeffs.empty()) throw UsageError("poly_eval: empty coefficient list");
    elem_t acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = f.mul(acc, x) ^ *it;
    return acc;
}

}  // namespace pmt
