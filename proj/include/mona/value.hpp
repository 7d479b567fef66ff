#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace mona {

using BigInt = boost::multiprecision::cpp_int;

// Arbitrary-precision integer with an int64 fast path. The wide representation
// is only held when the value does not fit in int64 (fib_iter(98) overflows).
class Int {
public:
    Int() : small_(0) {}
    Int(int64_t v) : small_(v) {}
    explicit Int(const BigInt& v) { assign_big(v); }

    bool is_small() const { return big_ == nullptr; }
    int64_t small() const { return small_; }
    BigInt wide() const { return big_ ? *big_ : BigInt(small_); }

    Int operator+(const Int& o) const;
    Int operator-(const Int& o) const;
    Int operator*(const Int& o) const;
    // Truncated division; caller checks for zero divisor.
    Int divided_by(const Int& o) const;

    int compare(const Int& o) const;
    bool operator==(const Int& o) const { return compare(o) == 0; }

    double to_double() const;
    std::string to_string() const;

    // Minimal big-endian magnitude bytes (empty for zero).
    std::vector<uint8_t> magnitude_bytes() const;
    bool negative() const;
    static Int from_magnitude(bool negative, const std::vector<uint8_t>& bytes);

private:
    void assign_big(const BigInt& v);

    int64_t small_ = 0;
    std::shared_ptr<const BigInt> big_;  // null in the fast path
};

enum class ValueKind : uint8_t {
    Int = 0,
    Float = 1,
    Bool = 2,
    Char = 3,
    List = 4,
    None = 5,
};

// A Mona runtime value: integer, float, boolean, character, or list.
// Strings are lists of characters. `None` is the result of a function that
// falls through without a return; it is discarded by expression statements.
class Value {
public:
    using List = std::vector<Value>;

    Value() : kind_(ValueKind::None) {}
    static Value none() { return Value(); }
    static Value integer(Int v);
    static Value floating(double v);
    static Value boolean(bool v);
    static Value character(char v);
    static Value list(List elems);

    ValueKind kind() const { return kind_; }
    bool is_int() const { return kind_ == ValueKind::Int; }
    bool is_float() const { return kind_ == ValueKind::Float; }
    bool is_bool() const { return kind_ == ValueKind::Bool; }
    bool is_char() const { return kind_ == ValueKind::Char; }
    bool is_list() const { return kind_ == ValueKind::List; }
    bool is_none() const { return kind_ == ValueKind::None; }
    bool is_numeric() const { return is_int() || is_float(); }

    const Int& as_int() const { return int_; }
    double as_float() const { return float_; }
    bool as_bool() const { return bool_; }
    char as_char() const { return char_; }
    const List& as_list() const { return *list_; }
    size_t list_size() const { return list_->size(); }

    // Copy-on-write access for item assignment.
    List& mutable_list();

    double numeric_as_double() const { return is_int() ? int_.to_double() : float_; }

    bool equals(const Value& o) const;

    // Rendering used by print: ints decimal, floats shortest round-trip,
    // bools True/False, chars raw, all-char lists as strings, other lists
    // bracketed and comma separated.
    std::string render() const;

    static Value from_string(const std::string& s);

private:
    ValueKind kind_;
    Int int_;
    double float_ = 0.0;
    bool bool_ = false;
    char char_ = 0;
    std::shared_ptr<List> list_;
};

std::string render_double(double v);

}  // namespace mona
