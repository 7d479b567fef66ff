#include "mona/state.hpp"

#include <algorithm>

namespace mona {

namespace {

template <typename K, typename V>
auto lower_bound_by_key(std::vector<std::pair<K, V>>& entries, const K& key) {
    return std::lower_bound(entries.begin(), entries.end(), key,
                            [](const std::pair<K, V>& e, const K& k) { return e.first < k; });
}

}  // namespace

Value* Frame::find_var(const std::string& name) {
    auto it = lower_bound_by_key(vars, name);
    if (it != vars.end() && it->first == name) return &it->second;
    return nullptr;
}

const Value* Frame::find_var(const std::string& name) const {
    return const_cast<Frame*>(this)->find_var(name);
}

bool Frame::declare_var(const std::string& name, Value v) {
    auto it = lower_bound_by_key(vars, name);
    if (it != vars.end() && it->first == name) return false;
    vars.insert(it, {name, std::move(v)});
    return true;
}

const Value* Frame::find_memvar(MemvarKey key) const {
    auto& entries = const_cast<Frame*>(this)->memvars;
    auto it = lower_bound_by_key(entries, key);
    if (it != entries.end() && it->first == key) return &it->second;
    return nullptr;
}

void Frame::put_memvar(MemvarKey key, Value v) {
    auto it = lower_bound_by_key(memvars, key);
    if (it != memvars.end() && it->first == key) {
        it->second = std::move(v);
        return;
    }
    memvars.insert(it, {key, std::move(v)});
}

MemoryState MemoryState::initial() {
    MemoryState st;
    st.frames.emplace_back();
    st.scope_seq.push_back(-1);
    st.active = 0;
    st.expr_counter = 0;
    return st;
}

}  // namespace mona
