#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include <cgs/dataset.hpp>
#include <cgs/errors.hpp>
#include <cgs/evaluate.hpp>
#include <cgs/rng.hpp>

using namespace cgs;
using eval::Splits;

namespace {

std::vector<int> four_class_labels(std::size_t per_class) {
    std::vector<int> y;
    for (int c = 0; c < 4; ++c) {
        y.insert(y.end(), per_class, c);
    }
    // Interleave a little so the splits cannot cheat on ordering.
    std::rotate(y.begin(), y.begin() + static_cast<long>(per_class / 2), y.end());
    return y;
}

// Two-node toy set: node 0 separates the two classes linearly, node 1 is
// pure noise.
data::Dataset toy_dataset() {
    data::Dataset ds;
    ds.n_nodes = 2;
    ds.n_channels = 2;
    ds.n_classes = 2;
    Rng rng(404);
    for (int i = 0; i < 200; ++i) {
        const int label = i % 2;
        const double sign = label == 0 ? 1.0 : -1.0;
        ds.x.push_back({sign + 0.1 * rng.normal(), sign + 0.1 * rng.normal(),
                        rng.normal(), rng.normal()});
        ds.y.push_back(label);
    }
    return ds;
}

}  // namespace

TEST_CASE("splits are stratified 60/15/25") {
    const auto y = four_class_labels(100);
    Splits sp = eval::make_splits(y, 4, 7);
    CHECK(sp.train.size() == 240);
    CHECK(sp.val.size() == 60);
    CHECK(sp.test.size() == 100);

    for (const auto* part : {&sp.train, &sp.val, &sp.test}) {
        CHECK(std::is_sorted(part->begin(), part->end()));
        std::vector<int> per_class(4, 0);
        for (std::size_t i : *part) per_class[y[i]]++;
        for (int c : per_class) CHECK(c == static_cast<int>(part->size()) / 4);
    }

    // Disjoint and covering.
    std::set<std::size_t> all;
    for (const auto* part : {&sp.train, &sp.val, &sp.test}) {
        all.insert(part->begin(), part->end());
    }
    CHECK(all.size() == y.size());
}

TEST_CASE("split rounding keeps every class covered") {
    // 41 samples of one class: test 10 (round .25*41=10.25), val 6, train 25.
    std::vector<int> y(41, 0);
    Splits sp = eval::make_splits(y, 1, 3);
    CHECK(sp.test.size() == 10);
    CHECK(sp.val.size() == 6);
    CHECK(sp.train.size() == 25);
}

TEST_CASE("splits are deterministic and seed-sensitive") {
    const auto y = four_class_labels(100);
    Splits a = eval::make_splits(y, 4, 7);
    Splits b = eval::make_splits(y, 4, 7);
    CHECK(a.test == b.test);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    Splits c = eval::make_splits(y, 4, 8);
    CHECK(a.test != c.test);
}

TEST_CASE("bad labels are rejected") {
    CHECK_THROWS_AS((void)eval::make_splits({0, 1, 7}, 4, 1), ParameterError);
    CHECK_THROWS_AS((void)eval::make_splits({0, -1}, 4, 1), ParameterError);
}

TEST_CASE("probe scores an informative node high and a noise node at chance") {
    data::Dataset ds = toy_dataset();
    Splits sp = eval::make_splits(ds.y, 2, 5);
    CHECK(eval::probe_accuracy(ds, {0}, sp) == doctest::Approx(1.0));
    const double noise = eval::probe_accuracy(ds, {1}, sp);
    CHECK(noise < 0.75);
    // Node order must not matter for the feature set {0,1}.
    CHECK(eval::probe_accuracy(ds, {0, 1}, sp) ==
          doctest::Approx(eval::probe_accuracy(ds, {1, 0}, sp)));
}

TEST_CASE("probe tolerates repeated nodes") {
    data::Dataset ds = toy_dataset();
    Splits sp = eval::make_splits(ds.y, 2, 5);
    // Duplicated columns are exactly collinear; the ridge term keeps the
    // normal equations solvable.
    CHECK(eval::probe_accuracy(ds, {0, 0}, sp) == doctest::Approx(1.0));
}

TEST_CASE("probe is deterministic") {
    data::Dataset ds = toy_dataset();
    Splits sp = eval::make_splits(ds.y, 2, 5);
    const double a = eval::probe_accuracy(ds, {0, 1}, sp);
    const double b = eval::probe_accuracy(ds, {0, 1}, sp);
    CHECK(a == b);
}
