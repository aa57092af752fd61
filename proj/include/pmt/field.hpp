#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace pmt {

// Every field value fits in 128 bits regardless of lambda.
using elem_t = unsigned __int128;

std::string elem_to_hex(elem_t v);
elem_t elem_from_hex(const std::string& hex);

// GF(2^lambda) defined by x^lambda + reduction_low. The leading term is
// implicit so that lambda = 128 still fits in one elem_t.
class FieldSpec {
public:
    static constexpr unsigned max_lambda = 128;
    static constexpr unsigned table_lambda = 16;  // log/exp tables up to here

    explicit FieldSpec(unsigned lambda);
    FieldSpec(unsigned lambda, elem_t reduction_low);

    // Shared instance with the built-in polynomial, cached per lambda.
    static std::shared_ptr<const FieldSpec> standard(unsigned lambda);

    // Built-in low-weight reduction polynomial (without x^lambda).
    static elem_t builtin_reduction(unsigned lambda);

    unsigned lambda() const { return lambda_; }
    elem_t reduction_low() const { return low_; }
    elem_t mask() const { return mask_; }
    std::string reduction_poly_hex() const;  // includes the leading x^lambda bit when lambda < 128
    std::string to_json() const;
    static FieldSpec from_json(const std::string& text);

    bool contains(elem_t v) const { return (v & ~mask_) == 0; }

    elem_t add(elem_t a, elem_t b) const { return a ^ b; }
    elem_t mul(elem_t a, elem_t b) const;
    elem_t inv(elem_t a) const;  // DomainError on zero

    // Log/exp tables exist only for lambda <= table_lambda.
    bool has_tables() const { return !log_.empty(); }
    // Multiplicative group order 2^lambda - 1 (valid when has_tables()).
    std::uint32_t group_order() const { return order_; }
    const std::vector<std::uint16_t>& log_table() const { return log_; }
    // exp_table()[i] = g^(i mod order) for i < 2*order; zero beyond, so a
    // zero_log() sentinel added to any real log lands on 0.
    const std::vector<std::uint16_t>& exp_table() const { return exp_; }
    std::uint32_t zero_log() const { return 2 * order_; }

    bool operator==(const FieldSpec& o) const { return lambda_ == o.lambda_ && low_ == o.low_; }
    bool operator!=(const FieldSpec& o) const { return !(*this == o); }

private:
    void init();
    elem_t mul_slow(elem_t a, elem_t b) const;
    elem_t inv_euclid(elem_t a) const;
    void build_tables();

    unsigned lambda_;
    elem_t low_;
    elem_t mask_;
    std::uint32_t order_ = 0;
    std::vector<std::uint16_t> log_;
    std::vector<std::uint16_t> exp_;
};

// Polynomial over GF(2) given by all its bits (degree <= 63) is irreducible.
// Trial division by every polynomial of degree 1..deg/2.
bool is_irreducible_small(std::uint64_t poly);

using FieldPtr = std::shared_ptr<const FieldSpec>;

struct FieldElement {
    elem_t value = 0;
    FieldPtr spec;

    FieldElement() = default;
    FieldElement(FieldPtr s, elem_t v);

    bool operator==(const FieldElement& o) const;
    bool operator!=(const FieldElement& o) const { return !(*this == o); }
};

FieldElement add(const FieldElement& a, const FieldElement& b);
FieldElement mul(const FieldElement& a, const FieldElement& b);
FieldElement inv(const FieldElement& a);
FieldElement poly_eval(const std::vector<FieldElement>& coeffs, const FieldElement& x);

// Raw-value Horner evaluation used by the hot paths.
elem_t poly_eval(const FieldSpec& f, const std::vector<elem_t>& coeffs, elem_t x);

}  // namespace pmt
