#include "mona/codec.hpp"

#include <bit>
#include <cstring>

namespace mona {

namespace {

constexpr char kMagic[4] = {'M', 'S', 'T', '1'};

class Writer {
public:
    explicit Writer(std::vector<uint8_t>& out) : out_(out) {}

    void u8(uint8_t v) { out_.push_back(v); }

    void u32(uint32_t v) {
        for (int i = 3; i >= 0; --i) out_.push_back(uint8_t(v >> (8 * i)));
    }

    void u64(uint64_t v) {
        for (int i = 7; i >= 0; --i) out_.push_back(uint8_t(v >> (8 * i)));
    }

    void i64(int64_t v) { u64(uint64_t(v)); }

    void bytes(const void* data, size_t len) {
        const uint8_t* p = static_cast<const uint8_t*>(data);
        out_.insert(out_.end(), p, p + len);
    }

    void str(const std::string& s) {
        u32(uint32_t(s.size()));
        bytes(s.data(), s.size());
    }

    void value(const Value& v) {
        u8(uint8_t(v.kind()));
        switch (v.kind()) {
            case ValueKind::Int: {
                const Int& i = v.as_int();
                std::vector<uint8_t> mag = i.magnitude_bytes();
                u8(i.negative() ? 1 : 0);
                u32(uint32_t(mag.size()));
                bytes(mag.data(), mag.size());
                break;
            }
            case ValueKind::Float: {
                uint64_t bits = std::bit_cast<uint64_t>(v.as_float());
                u64(bits);
                break;
            }
            case ValueKind::Bool: u8(v.as_bool() ? 1 : 0); break;
            case ValueKind::Char: u8(uint8_t(v.as_char())); break;
            case ValueKind::None: break;
            case ValueKind::List: {
                const auto& elems = v.as_list();
                u32(uint32_t(elems.size()));
                for (const Value& e : elems) value(e);
                break;
            }
        }
    }

private:
    std::vector<uint8_t>& out_;
};

class Reader {
public:
    explicit Reader(const std::vector<uint8_t>& in) : in_(in) {}

    uint8_t u8() {
        need(1);
        return in_[pos_++];
    }

    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
        return v;
    }

    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_++];
        return v;
    }

    int64_t i64() { return int64_t(u64()); }

    std::string str() {
        uint32_t len = u32();
        need(len);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), len);
        pos_ += len;
        return s;
    }

    Value value(int depth = 0) {
        if (depth > 512) throw CorruptSnapshot("value nesting too deep");
        switch (ValueKind(u8())) {
            case ValueKind::Int: {
                bool neg = u8() != 0;
                uint32_t len = u32();
                need(len);
                std::vector<uint8_t> mag(in_.begin() + pos_, in_.begin() + pos_ + len);
                pos_ += len;
                if (!mag.empty() && mag[0] == 0) throw CorruptSnapshot("non-minimal integer");
                if (neg && mag.empty()) throw CorruptSnapshot("negative zero");
                return Value::integer(Int::from_magnitude(neg, mag));
            }
            case ValueKind::Float: return Value::floating(std::bit_cast<double>(u64()));
            case ValueKind::Bool: return Value::boolean(u8() != 0);
            case ValueKind::Char: return Value::character(char(u8()));
            case ValueKind::None: return Value::none();
            case ValueKind::List: {
                uint32_t count = u32();
                Value::List elems;
                elems.reserve(std::min<uint32_t>(count, 4096));
                for (uint32_t i = 0; i < count; ++i) elems.push_back(value(depth + 1));
                return Value::list(std::move(elems));
            }
        }
        throw CorruptSnapshot("bad value tag");
    }

    void expect_end() const {
        if (pos_ != in_.size()) throw CorruptSnapshot("trailing bytes");
    }

private:
    void need(size_t n) {
        if (pos_ + n > in_.size()) throw CorruptSnapshot("truncated");
    }

    const std::vector<uint8_t>& in_;
    size_t pos_ = 0;
};

}  // namespace

std::vector<uint8_t> canonical_encode(const MemoryState& state) {
    std::vector<uint8_t> out;
    out.reserve(256);
    Writer w(out);
    w.bytes(kMagic, sizeof(kMagic));
    w.u32(uint32_t(state.stack.size()));
    for (const Value& v : state.stack) w.value(v);
    w.u32(uint32_t(state.frames.size()));
    for (const Frame& f : state.frames) {
        w.u32(uint32_t(f.vars.size()));
        for (const auto& [name, v] : f.vars) {
            w.str(name);
            w.value(v);
        }
        w.u32(uint32_t(f.memvars.size()));
        for (const auto& [key, v] : f.memvars) {
            w.u32(uint32_t(key.anchor_seq));
            w.u32(key.slot);
            w.value(v);
        }
    }
    w.u32(uint32_t(state.scope_seq.size()));
    for (int64_t c : state.scope_seq) w.i64(c);
    w.i64(state.active);
    w.u64(state.expr_counter);
    return out;
}

MemoryState canonical_decode(const std::vector<uint8_t>& bytes) {
    Reader r(bytes);
    for (char m : kMagic) {
        if (char(r.u8()) != m) throw CorruptSnapshot("bad magic");
    }
    MemoryState st;
    st.frames.clear();
    st.scope_seq.clear();
    uint32_t stack_count = r.u32();
    st.stack.reserve(std::min<uint32_t>(stack_count, 4096));
    for (uint32_t i = 0; i < stack_count; ++i) st.stack.push_back(r.value());
    uint32_t frame_count = r.u32();
    for (uint32_t d = 0; d < frame_count; ++d) {
        Frame f;
        uint32_t var_count = r.u32();
        for (uint32_t i = 0; i < var_count; ++i) {
            std::string name = r.str();
            Value v = r.value();
            if (!f.vars.empty() && !(f.vars.back().first < name)) {
                throw CorruptSnapshot("unsorted vars");
            }
            f.vars.emplace_back(std::move(name), std::move(v));
        }
        uint32_t memvar_count = r.u32();
        for (uint32_t i = 0; i < memvar_count; ++i) {
            MemvarKey key{int32_t(r.u32()), r.u32()};
            Value v = r.value();
            if (!f.memvars.empty() && !(f.memvars.back().first < key)) {
                throw CorruptSnapshot("unsorted memvars");
            }
            f.memvars.emplace_back(key, std::move(v));
        }
        st.frames.push_back(std::move(f));
    }
    uint32_t scope_count = r.u32();
    for (uint32_t i = 0; i < scope_count; ++i) st.scope_seq.push_back(r.i64());
    st.active = r.i64();
    st.expr_counter = r.u64();
    r.expect_end();
    if (st.frames.size() != st.scope_seq.size()) throw CorruptSnapshot("frame/scope mismatch");
    return st;
}

}  // namespace mona
