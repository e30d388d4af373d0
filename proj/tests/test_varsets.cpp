#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "structsel/varset.hpp"

using namespace structsel;

namespace {

RegistryPtr small_reg() { return VarRegistry::create({"a", "b", "c", "d", "e"}); }

std::set<int> as_set(const VarSet& s) {
    auto idx = s.indices();
    return {idx.begin(), idx.end()};
}

}  // namespace

TEST_CASE("registry creation and lookup") {
    auto reg = small_reg();
    CHECK(reg->size() == 5);
    CHECK(reg->name(0) == "a");
    CHECK(reg->name(4) == "e");
    CHECK(reg->index("c") == 2);
    CHECK(reg->find("c") == 2);
    CHECK_FALSE(reg->find("zz").has_value());
    CHECK_THROWS_AS(reg->index("zz"), UnknownVariable);
    CHECK(reg->universe_mask() == 0b11111);
}

TEST_CASE("registry rejects bad name lists") {
    CHECK_THROWS_AS(VarRegistry::create({"a", "a"}), Error);
    CHECK_THROWS_AS(VarRegistry::create({"a", ""}), Error);
    std::vector<std::string> too_many;
    for (int i = 0; i < 64; ++i) too_many.push_back("v" + std::to_string(i));
    CHECK_THROWS_AS(VarRegistry::create(too_many), CapExceeded);
    std::vector<std::string> at_cap(too_many.begin(), too_many.begin() + 63);
    CHECK(VarRegistry::create(at_cap)->size() == 63);
}

TEST_CASE("registry content hash identifies name lists") {
    auto r1 = VarRegistry::create({"a", "b"});
    auto r2 = VarRegistry::create({"a", "b"});
    auto r3 = VarRegistry::create({"b", "a"});
    CHECK(r1->content_hash() == r2->content_hash());
    CHECK(r1->content_hash() != r3->content_hash());
    CHECK(r1->same_as(*r2));
    CHECK_FALSE(r1->same_as(*r3));
}

TEST_CASE("registry bundles") {
    auto reg = VarRegistry::create({"a", "b", "c", "d"}, {{"b", "c"}});
    CHECK(reg->bundles().size() == 1);
    CHECK(reg->bundles()[0] == 0b0110);
    CHECK(reg->bundle_of(1) == 0b0110);
    CHECK(reg->bundle_of(2) == 0b0110);
    CHECK(reg->bundle_of(0) == 0);
    CHECK_THROWS_AS(VarRegistry::create({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}), Error);
    CHECK_THROWS_AS(VarRegistry::create({"a", "b"}, {{"a", "zz"}}), UnknownVariable);
}

TEST_CASE("varset construction and accessors") {
    auto reg = small_reg();
    VarSet s = VarSet::of(reg, {"a", "c", "e"});
    CHECK(s.mask() == 0b10101);
    CHECK(s.count() == 3);
    CHECK(s.contains("a"));
    CHECK(s.contains(4));
    CHECK_FALSE(s.contains("b"));
    CHECK(s.indices() == std::vector<int>{0, 2, 4});
    CHECK(s.to_names() == std::vector<std::string>{"a", "c", "e"});
    CHECK(s.to_string() == "{a,c,e}");
    CHECK(VarSet::empty(reg).is_empty());
    CHECK(VarSet::empty(reg).to_string() == "{}");
    CHECK(VarSet::universe(reg).mask() == reg->universe_mask());
    CHECK_THROWS_AS(VarSet::of(reg, {"zz"}), UnknownVariable);
    CHECK_THROWS_AS(VarSet(reg, 0b100000), Error);
    CHECK_THROWS_AS(VarSet(nullptr, 0), Error);
}

TEST_CASE("set algebra agrees with std::set") {
    auto reg = small_reg();
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint64_t> pick(0, reg->universe_mask());
    for (int rep = 0; rep < 200; ++rep) {
        VarSet x(reg, pick(rng)), y(reg, pick(rng));
        std::set<int> sx = as_set(x), sy = as_set(y);

        std::set<int> u, i, d;
        std::set_union(sx.begin(), sx.end(), sy.begin(), sy.end(), std::inserter(u, u.end()));
        std::set_intersection(sx.begin(), sx.end(), sy.begin(), sy.end(),
                              std::inserter(i, i.end()));
        std::set_difference(sx.begin(), sx.end(), sy.begin(), sy.end(),
                            std::inserter(d, d.end()));

        CHECK(as_set(x.set_union(y)) == u);
        CHECK(as_set(x.set_intersect(y)) == i);
        CHECK(as_set(x.set_difference(y)) == d);
        CHECK(x.is_subset_of(y) == std::includes(sy.begin(), sy.end(), sx.begin(), sx.end()));
        CHECK(as_set(x.complement().set_union(x)) == as_set(VarSet::universe(reg)));
        CHECK(x.complement().set_intersect(x).is_empty());
    }
}

TEST_CASE("cross registry operations throw") {
    auto r1 = small_reg();
    auto r2 = VarRegistry::create({"x", "y"});
    VarSet a = VarSet::of(r1, {"a"});
    VarSet b = VarSet::of(r2, {"x"});
    CHECK_THROWS_AS(a.set_union(b), RegistryMismatch);
    CHECK_THROWS_AS(check_same_registry(r1, r2), RegistryMismatch);

    auto r1_clone = VarRegistry::create({"a", "b", "c", "d", "e"});
    VarSet a2 = VarSet::of(r1_clone, {"a"});
    CHECK(a == a2);
    CHECK(a.set_union(a2).mask() == a.mask());
}

TEST_CASE("default constructed varset is detached") {
    VarSet d;
    CHECK(d.is_empty());
    CHECK(d.mask() == 0);
    CHECK(d == VarSet{});
    CHECK_FALSE(d == VarSet::empty(small_reg()));
    CHECK_THROWS_AS(d.set_union(VarSet::empty(small_reg())), Error);
}

TEST_CASE("power set enumerates every subset in ascending mask order") {
    auto reg = small_reg();
    VarSet u = VarSet::of(reg, {"a", "c", "d"});
    Dictionary p = power_set(u);
    CHECK(p.size() == 8);
    std::vector<std::uint64_t> expect = {0b0000, 0b0001, 0b0100, 0b0101,
                                         0b1000, 0b1001, 0b1100, 0b1101};
    CHECK(p.masks() == expect);

    EnumerationCaps tight;
    tight.materialize = 2;
    CHECK_THROWS_AS(power_set(u, tight), CapExceeded);
}

TEST_CASE("dictionary canonical form") {
    auto reg = small_reg();
    Dictionary d = Dictionary::from_masks(reg, {0b101, 0b1, 0b101, 0b11});
    CHECK(d.size() == 3);
    CHECK(d.masks() == std::vector<std::uint64_t>{0b1, 0b11, 0b101});
    CHECK(d.contains(0b11));
    CHECK_FALSE(d.contains(0b100));
    CHECK(d.contains(VarSet::of(reg, {"a", "c"})));
    CHECK(d.at(0) == VarSet::of(reg, {"a"}));

    CHECK_THROWS_AS(Dictionary(reg, {0b11, 0b1}), Error);
    CHECK_THROWS_AS(Dictionary(reg, {0b100000}), Error);
}

TEST_CASE("dictionary set operations agree with std::set") {
    auto reg = small_reg();
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::uint64_t> pick(0, reg->universe_mask());
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::uint64_t> ma, mb;
        for (int i = 0; i < 10; ++i) ma.push_back(pick(rng));
        for (int i = 0; i < 10; ++i) mb.push_back(pick(rng));
        Dictionary a = Dictionary::from_masks(reg, ma);
        Dictionary b = Dictionary::from_masks(reg, mb);
        std::set<std::uint64_t> sa(ma.begin(), ma.end()), sb(mb.begin(), mb.end());

        std::set<std::uint64_t> u, i, d;
        std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(u, u.end()));
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                              std::inserter(i, i.end()));
        std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(),
                            std::inserter(d, d.end()));

        auto masks_of = [](const Dictionary& dd) {
            return std::set<std::uint64_t>(dd.masks().begin(), dd.masks().end());
        };
        CHECK(masks_of(dict_union(a, b)) == u);
        CHECK(masks_of(dict_intersect(a, b)) == i);
        CHECK(masks_of(dict_difference(a, b)) == d);
    }
}

TEST_CASE("dictionary complement within a universe") {
    auto reg = small_reg();
    VarSet u = VarSet::of(reg, {"a", "b"});
    Dictionary d = Dictionary::from_masks(reg, {0b00, 0b11});
    Dictionary c = dict_complement(d, u);
    CHECK(c.masks() == std::vector<std::uint64_t>{0b01, 0b10});
}
