#include "structsel/varset.hpp"

#include <algorithm>
#include <bit>

namespace structsel {

namespace {

std::uint64_t fnv1a(const std::vector<std::string>& names) {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& n : names) {
        for (char c : n) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        h ^= static_cast<unsigned char>('\n');
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

RegistryPtr VarRegistry::create(std::vector<std::string> names,
                                std::vector<std::vector<std::string>> bundles) {
    if (names.size() > kMaxVars)
        throw CapExceeded("registry holds " + std::to_string(names.size()) +
                          " variables, limit is " + std::to_string(kMaxVars));
    auto reg = std::shared_ptr<VarRegistry>(new VarRegistry());
    reg->names_ = std::move(names);
    for (std::size_t i = 0; i < reg->names_.size(); ++i) {
        const auto& n = reg->names_[i];
        if (n.empty()) throw Error("registry name at position " + std::to_string(i) + " is empty");
        if (!reg->index_.emplace(n, static_cast<int>(i)).second)
            throw Error("duplicate registry name '" + n + "'");
    }
    reg->universe_ = reg->names_.empty() ? 0 : (~0ull >> (64 - reg->names_.size()));
    reg->hash_ = fnv1a(reg->names_);

    std::uint64_t seen = 0;
    for (const auto& b : bundles) {
        std::uint64_t m = 0;
        for (const auto& n : b) m |= 1ull << reg->index(n);
        if (m == 0) throw Error("empty bundle");
        if (m & seen) throw Error("bundles overlap");
        seen |= m;
        reg->bundles_.push_back(m);
    }
    return reg;
}

int VarRegistry::index(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw UnknownVariable("unknown variable '" + std::string(name) + "'");
    return it->second;
}

std::optional<int> VarRegistry::find(std::string_view name) const noexcept {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t VarRegistry::bundle_of(int i) const {
    const std::uint64_t bit = 1ull << i;
    for (auto m : bundles_)
        if (m & bit) return m;
    return 0;
}

void check_same_registry(const RegistryPtr& a, const RegistryPtr& b) {
    if (!a || !b || !a->same_as(*b))
        throw RegistryMismatch("operands belong to different registries");
}

VarSet::VarSet(RegistryPtr reg, std::uint64_t mask) : reg_(std::move(reg)), mask_(mask) {
    if (!reg_) throw Error("VarSet requires a registry");
    if (mask_ & ~reg_->universe_mask())
        throw Error("mask has bits outside the registry universe");
}

VarSet VarSet::universe(RegistryPtr reg) {
    auto m = reg->universe_mask();
    return VarSet(std::move(reg), m);
}

VarSet VarSet::of(const RegistryPtr& reg, const std::vector<std::string>& names) {
    std::uint64_t m = 0;
    for (const auto& n : names) m |= 1ull << reg->index(n);
    return VarSet(reg, m);
}

int VarSet::count() const { return std::popcount(mask_); }

bool VarSet::is_subset_of(const VarSet& other) const {
    check_same_registry(reg_, other.reg_);
    return (mask_ & ~other.mask_) == 0;
}

VarSet VarSet::set_union(const VarSet& other) const {
    check_same_registry(reg_, other.reg_);
    return VarSet(reg_, mask_ | other.mask_);
}

VarSet VarSet::set_intersect(const VarSet& other) const {
    check_same_registry(reg_, other.reg_);
    return VarSet(reg_, mask_ & other.mask_);
}

VarSet VarSet::set_difference(const VarSet& other) const {
    check_same_registry(reg_, other.reg_);
    return VarSet(reg_, mask_ & ~other.mask_);
}

VarSet VarSet::complement() const { return VarSet(reg_, reg_->universe_mask() & ~mask_); }

std::vector<int> VarSet::indices() const {
    std::vector<int> out;
    for (std::uint64_t m = mask_; m; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
}

std::vector<std::string> VarSet::to_names() const {
    std::vector<std::string> out;
    for (int i : indices()) out.push_back(reg_->name(i));
    return out;
}

std::string VarSet::to_string() const {
    std::string s = "{";
    bool first = true;
    for (const auto& n : to_names()) {
        if (!first) s += ",";
        s += n;
        first = false;
    }
    return s + "}";
}

Dictionary::Dictionary(RegistryPtr reg, std::vector<std::uint64_t> sorted_unique_masks)
    : reg_(std::move(reg)), masks_(std::move(sorted_unique_masks)) {
    if (!reg_) throw Error("Dictionary requires a registry");
    const std::uint64_t univ = reg_->universe_mask();
    std::uint64_t prev = 0;
    for (std::size_t i = 0; i < masks_.size(); ++i) {
        if (masks_[i] & ~univ) throw Error("dictionary member outside the registry universe");
        if (i > 0 && masks_[i] <= prev) throw Error("dictionary members not strictly ascending");
        prev = masks_[i];
    }
}

Dictionary Dictionary::from_masks(RegistryPtr reg, std::vector<std::uint64_t> masks) {
    std::sort(masks.begin(), masks.end());
    masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
    return Dictionary(std::move(reg), std::move(masks));
}

bool Dictionary::contains(std::uint64_t mask) const {
    return std::binary_search(masks_.begin(), masks_.end(), mask);
}

bool Dictionary::contains(const VarSet& s) const {
    check_same_registry(reg_, s.registry());
    return contains(s.mask());
}

Dictionary set_ops(const Dictionary& a, const Dictionary& b, SetOp op) {
    check_same_registry(a.registry(), b.registry());
    std::vector<std::uint64_t> out;
    const auto& x = a.masks();
    const auto& y = b.masks();
    switch (op) {
        case SetOp::Union:
            out.reserve(x.size() + y.size());
            std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
            break;
        case SetOp::Intersect:
            std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
            break;
        case SetOp::Difference:
            std::set_difference(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
            break;
    }
    return Dictionary(a.registry(), std::move(out));
}

Dictionary dict_union(const Dictionary& a, const Dictionary& b) { return set_ops(a, b, SetOp::Union); }
Dictionary dict_intersect(const Dictionary& a, const Dictionary& b) { return set_ops(a, b, SetOp::Intersect); }
Dictionary dict_difference(const Dictionary& a, const Dictionary& b) { return set_ops(a, b, SetOp::Difference); }

Dictionary power_set(const VarSet& universe, const EnumerationCaps& caps) {
    const int k = universe.count();
    if (k > caps.materialize)
        throw CapExceeded("power set over " + std::to_string(k) +
                          " variables exceeds the materialization cap of " +
                          std::to_string(caps.materialize));
    // Submasks of a fixed mask enumerate in ascending order via (s - m) & m.
    std::vector<std::uint64_t> out;
    out.reserve(1ull << k);
    const std::uint64_t m = universe.mask();
    std::uint64_t s = 0;
    while (true) {
        out.push_back(s);
        s = (s - m) & m;
        if (s == 0) break;
    }
    return Dictionary(universe.registry(), std::move(out));
}

Dictionary dict_complement(const Dictionary& d, const VarSet& universe,
                           const EnumerationCaps& caps) {
    check_same_registry(d.registry(), universe.registry());
    const int k = universe.count();
    if (k > caps.materialize)
        throw CapExceeded("complement over " + std::to_string(k) +
                          " variables exceeds the materialization cap of " +
                          std::to_string(caps.materialize));
    std::vector<std::uint64_t> out;
    out.reserve((1ull << k) - d.size());
    const std::uint64_t m = universe.mask();
    const auto& in = d.masks();
    std::size_t j = 0;
    std::uint64_t s = 0;
    while (true) {
        while (j < in.size() && in[j] < s) ++j;
        if (j >= in.size() || in[j] != s) out.push_back(s);
        s = (s - m) & m;
        if (s == 0) break;
    }
    return Dictionary(d.registry(), std::move(out));
}

}  // namespace structsel
