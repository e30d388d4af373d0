#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "structsel/errors.hpp"

namespace structsel {

class VarRegistry;
using RegistryPtr = std::shared_ptr<const VarRegistry>;

// Immutable, shared name table. Variables are indexed 0..size-1 and sets of
// them are stored as bit masks, so at most 63 variables per registry.
class VarRegistry {
public:
    static constexpr int kMaxVars = 63;

    static RegistryPtr create(std::vector<std::string> names,
                              std::vector<std::vector<std::string>> bundles = {});

    std::size_t size() const { return names_.size(); }
    const std::string& name(int i) const { return names_.at(static_cast<std::size_t>(i)); }
    const std::vector<std::string>& names() const { return names_; }

    int index(std::string_view name) const;                    // throws UnknownVariable
    std::optional<int> find(std::string_view name) const noexcept;

    std::uint64_t universe_mask() const { return universe_; }

    // Declared atomic dummy blocks (disjoint), as masks. Used by roadmap
    // synthesis to keep a block together on the consequent side.
    const std::vector<std::uint64_t>& bundles() const { return bundles_; }
    // Mask of the bundle containing variable i, or 0 if none.
    std::uint64_t bundle_of(int i) const;

    // FNV-1a over the newline-joined names; pinned into binary dictionary
    // headers so files cannot be read back against the wrong registry.
    std::uint64_t content_hash() const { return hash_; }

    bool same_as(const VarRegistry& other) const {
        return this == &other || (hash_ == other.hash_ && names_ == other.names_);
    }

private:
    VarRegistry() = default;
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::uint64_t> bundles_;
    std::uint64_t universe_ = 0;
    std::uint64_t hash_ = 0;
};

void check_same_registry(const RegistryPtr& a, const RegistryPtr& b);

// A subset of one registry's variables, stored as a 64-bit mask.
class VarSet {
public:
    // Detached empty set; a placeholder for default-constructed holders.
    // Any set algebra against it throws via the registry check.
    VarSet() : mask_(0) {}

    VarSet(RegistryPtr reg, std::uint64_t mask);

    static VarSet empty(RegistryPtr reg) { return VarSet(std::move(reg), 0); }
    static VarSet universe(RegistryPtr reg);
    static VarSet of(const RegistryPtr& reg, const std::vector<std::string>& names);

    std::uint64_t mask() const { return mask_; }
    const RegistryPtr& registry() const { return reg_; }

    int count() const;
    bool is_empty() const { return mask_ == 0; }
    bool contains(int i) const { return (mask_ >> i) & 1u; }
    bool contains(std::string_view name) const { return contains(reg_->index(name)); }
    bool is_subset_of(const VarSet& other) const;

    VarSet set_union(const VarSet& other) const;
    VarSet set_intersect(const VarSet& other) const;
    VarSet set_difference(const VarSet& other) const;
    VarSet complement() const;  // within the registry universe

    std::vector<int> indices() const;
    std::vector<std::string> to_names() const;  // registry order
    std::string to_string() const;              // "{a,b,c}"

    friend bool operator==(const VarSet& a, const VarSet& b) {
        if (a.mask_ != b.mask_) return false;
        if (a.reg_ == b.reg_) return true;
        return a.reg_ && b.reg_ && a.reg_->same_as(*b.reg_);
    }
    friend bool operator!=(const VarSet& a, const VarSet& b) { return !(a == b); }

private:
    RegistryPtr reg_;
    std::uint64_t mask_;
};

// Hard limits on what enumeration routines will attempt. `materialize` bounds
// operations that build a full 2^k member list (power sets, complements);
// `scan` bounds filters that iterate 2^k candidates but keep only survivors.
struct EnumerationCaps {
    int materialize = 25;
    int scan = 28;
};

// A finite family of variable sets over one registry, canonically ordered by
// ascending mask and deduplicated.
class Dictionary {
public:
    Dictionary(RegistryPtr reg, std::vector<std::uint64_t> sorted_unique_masks);

    // Sorts and dedups.
    static Dictionary from_masks(RegistryPtr reg, std::vector<std::uint64_t> masks);

    const RegistryPtr& registry() const { return reg_; }
    std::size_t size() const { return masks_.size(); }
    const std::vector<std::uint64_t>& masks() const { return masks_; }
    VarSet at(std::size_t i) const { return VarSet(reg_, masks_.at(i)); }

    bool contains(std::uint64_t mask) const;
    bool contains(const VarSet& s) const;

    friend bool operator==(const Dictionary& a, const Dictionary& b) {
        return a.masks_ == b.masks_ && a.reg_->same_as(*b.reg_);
    }
    friend bool operator!=(const Dictionary& a, const Dictionary& b) { return !(a == b); }

private:
    RegistryPtr reg_;
    std::vector<std::uint64_t> masks_;
};

enum class SetOp { Union, Intersect, Difference };

Dictionary set_ops(const Dictionary& a, const Dictionary& b, SetOp op);
Dictionary dict_union(const Dictionary& a, const Dictionary& b);
Dictionary dict_intersect(const Dictionary& a, const Dictionary& b);
Dictionary dict_difference(const Dictionary& a, const Dictionary& b);

// All subsets of `universe`, ascending by mask. Throws CapExceeded when
// |universe| > caps.materialize.
Dictionary power_set(const VarSet& universe, const EnumerationCaps& caps = {});

// P(universe) minus d. Same cap as power_set.
Dictionary dict_complement(const Dictionary& d, const VarSet& universe,
                           const EnumerationCaps& caps = {});

}  // namespace structsel
