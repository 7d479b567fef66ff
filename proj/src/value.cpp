#include "mona/value.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <limits>

namespace mona {

void Int::assign_big(const BigInt& v) {
    if (v >= std::numeric_limits<int64_t>::min() && v <= std::numeric_limits<int64_t>::max()) {
        small_ = static_cast<int64_t>(v);
        big_.reset();
    } else {
        small_ = 0;
        big_ = std::make_shared<const BigInt>(v);
    }
}

Int Int::operator+(const Int& o) const {
    if (is_small() && o.is_small()) {
        int64_t r;
        if (!__builtin_add_overflow(small_, o.small_, &r)) return Int(r);
    }
    return Int(wide() + o.wide());
}

Int Int::operator-(const Int& o) const {
    if (is_small() && o.is_small()) {
        int64_t r;
        if (!__builtin_sub_overflow(small_, o.small_, &r)) return Int(r);
    }
    return Int(wide() - o.wide());
}

Int Int::operator*(const Int& o) const {
    if (is_small() && o.is_small()) {
        int64_t r;
        if (!__builtin_mul_overflow(small_, o.small_, &r)) return Int(r);
    }
    return Int(wide() * o.wide());
}

Int Int::divided_by(const Int& o) const {
    if (is_small() && o.is_small()) {
        if (!(small_ == std::numeric_limits<int64_t>::min() && o.small_ == -1)) {
            return Int(small_ / o.small_);  // truncates toward zero
        }
    }
    return Int(wide() / o.wide());
}

int Int::compare(const Int& o) const {
    if (is_small() && o.is_small()) {
        return small_ < o.small_ ? -1 : (small_ > o.small_ ? 1 : 0);
    }
    BigInt a = wide(), b = o.wide();
    return a < b ? -1 : (a > b ? 1 : 0);
}

double Int::to_double() const {
    if (is_small()) return static_cast<double>(small_);
    return big_->convert_to<double>();
}

std::string Int::to_string() const {
    if (is_small()) return std::to_string(small_);
    return big_->str();
}

bool Int::negative() const {
    if (is_small()) return small_ < 0;
    return *big_ < 0;
}

std::vector<uint8_t> Int::magnitude_bytes() const {
    BigInt mag = wide();
    if (mag < 0) mag = -mag;
    std::vector<uint8_t> out;
    while (mag > 0) {
        out.push_back(static_cast<uint8_t>(mag & 0xff));
        mag >>= 8;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

Int Int::from_magnitude(bool negative, const std::vector<uint8_t>& bytes) {
    BigInt mag = 0;
    for (uint8_t b : bytes) {
        mag <<= 8;
        mag += b;
    }
    if (negative) mag = -mag;
    return Int(mag);
}

Value Value::integer(Int v) {
    Value r;
    r.kind_ = ValueKind::Int;
    r.int_ = std::move(v);
    return r;
}

Value Value::floating(double v) {
    Value r;
    r.kind_ = ValueKind::Float;
    r.float_ = v;
    return r;
}

Value Value::boolean(bool v) {
    Value r;
    r.kind_ = ValueKind::Bool;
    r.bool_ = v;
    return r;
}

Value Value::character(char v) {
    Value r;
    r.kind_ = ValueKind::Char;
    r.char_ = v;
    return r;
}

Value Value::list(List elems) {
    Value r;
    r.kind_ = ValueKind::List;
    r.list_ = std::make_shared<List>(std::move(elems));
    return r;
}

Value Value::from_string(const std::string& s) {
    List chars;
    chars.reserve(s.size());
    for (char c : s) chars.push_back(Value::character(c));
    return Value::list(std::move(chars));
}

Value::List& Value::mutable_list() {
    if (list_.use_count() > 1) {
        list_ = std::make_shared<List>(*list_);
    }
    return const_cast<List&>(*list_);
}

bool Value::equals(const Value& o) const {
    if (is_numeric() && o.is_numeric()) {
        if (is_int() && o.is_int()) return int_ == o.int_;
        return numeric_as_double() == o.numeric_as_double();
    }
    if (kind_ != o.kind_) return false;
    switch (kind_) {
        case ValueKind::Bool: return bool_ == o.bool_;
        case ValueKind::Char: return char_ == o.char_;
        case ValueKind::None: return true;
        case ValueKind::List: {
            const List& a = *list_;
            const List& b = *o.list_;
            if (a.size() != b.size()) return false;
            for (size_t i = 0; i < a.size(); ++i) {
                if (!a[i].equals(b[i])) return false;
            }
            return true;
        }
        default: return false;  // unreachable
    }
}

std::string render_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

std::string Value::render() const {
    switch (kind_) {
        case ValueKind::Int: return int_.to_string();
        case ValueKind::Float: return render_double(float_);
        case ValueKind::Bool: return bool_ ? "True" : "False";
        case ValueKind::Char: return std::string(1, char_);
        case ValueKind::None: return "none";
        case ValueKind::List: {
            const List& elems = *list_;
            bool all_chars = !elems.empty();
            for (const Value& e : elems) {
                if (!e.is_char()) {
                    all_chars = false;
                    break;
                }
            }
            if (all_chars) {
                std::string s;
                s.reserve(elems.size());
                for (const Value& e : elems) s.push_back(e.as_char());
                return s;
            }
            std::string s = "[";
            for (size_t i = 0; i < elems.size(); ++i) {
                if (i) s += ", ";
                s += elems[i].render();
            }
            s += "]";
            return s;
        }
    }
    return {};
}

}  // namespace mona
