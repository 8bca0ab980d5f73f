#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <cgs/baselines.hpp>
#include <cgs/dataset.hpp>
#include <cgs/errors.hpp>
#include <cgs/evaluate.hpp>
#include <cgs/rng.hpp>
#include <cgs/topology.hpp>
#include <cgs/train.hpp>

using namespace cgs;

namespace {

data::GeneratedTask split_task() {
    data::TaskSpec s;
    s.layout = "grid";
    s.rows = 1;
    s.cols = 8;
    s.channels = 4;
    s.placement = "split";
    s.samples = 400;
    s.seed = 1;
    return data::make_planted_task(s);
}

topo::DistanceMatrix path4() {
    return topo::DistanceMatrix::from_layout(topo::NodeLayout::grid(1, 4));
}

}  // namespace

TEST_CASE("mi ranking finds the planted carriers") {
    data::GeneratedTask t = split_task();
    baseline::MiResult mi = baseline::mi_ranking(t.data);
    REQUIRE(mi.mi.size() == 8);
    REQUIRE(mi.ranking.size() == 8);

    // The strong trio dominates, the faint carrier is next, noise trails.
    std::vector<std::size_t> top3(mi.ranking.begin(), mi.ranking.begin() + 3);
    std::sort(top3.begin(), top3.end());
    CHECK(top3 == std::vector<std::size_t>{0, 1, 2});
    CHECK(mi.ranking[3] == 7);
    for (std::size_t n : {0UL, 1UL, 2UL}) CHECK(mi.mi[n] > 0.5);
    CHECK(mi.mi[7] > 0.02);
    CHECK(mi.mi[7] < 0.3);
    for (std::size_t n : {3UL, 4UL, 5UL, 6UL}) CHECK(mi.mi[n] < 0.05);

    // Ranking is sorted by the scores it reports.
    for (std::size_t i = 0; i + 1 < mi.ranking.size(); ++i) {
        CHECK(mi.mi[mi.ranking[i]] >= mi.mi[mi.ranking[i + 1]]);
    }
}

TEST_CASE("mi ties break toward the lower node index") {
    // Nodes 1 and 2 carry identical values, node 0 differs.
    data::Dataset ds;
    ds.n_nodes = 3;
    ds.n_channels = 2;
    ds.n_classes = 2;
    Rng rng(99);
    for (int i = 0; i < 100; ++i) {
        const int y = i % 2;
        const double a = rng.normal() * (1.0 + y);
        const double b = rng.normal() * (1.0 + y);
        const double c = rng.normal();
        const double d = rng.normal();
        ds.x.push_back({a, b, c, d, c, d});
        ds.y.push_back(y);
    }
    baseline::MiResult mi = baseline::mi_ranking(ds);
    CHECK(mi.mi[1] == mi.mi[2]);
    const auto pos1 = std::find(mi.ranking.begin(), mi.ranking.end(), 1UL);
    const auto pos2 = std::find(mi.ranking.begin(), mi.ranking.end(), 2UL);
    CHECK(pos1 < pos2);
}

TEST_CASE("greedy follows the ranking under the constraint") {
    // Unit square, sides under the threshold, diagonals over. Ranking wants
    // node 3 second, but 3 is diagonal from 0, so greedy settles for 1 and
    // picks 3 at the last vertex where the edge 1-3 is a side.
    topo::BayesNet bn(topo::CommGraph::line(3));
    auto sq = topo::DistanceMatrix::from_layout(topo::NodeLayout::grid(2, 2));
    auto pick = baseline::greedy_constrained_select({0, 3, 1, 2}, bn, sq, 0.75);
    REQUIRE(pick.has_value());
    CHECK(*pick == std::vector<std::size_t>{0, 1, 3});
    CHECK(topo::is_feasible_selection(*pick, bn, sq, 0.75));
}

TEST_CASE("greedy looks ahead before committing") {
    // Path 0-1-2-3, unit steps only. Starting from node 1, taking node 0
    // next would strand the third vertex (0's only neighbor is 1, already
    // used), so the lookahead forces 2 instead.
    topo::BayesNet bn(topo::CommGraph::line(3));
    auto pick = baseline::greedy_constrained_select({1, 0, 2, 3}, bn, path4(), 0.34);
    REQUIRE(pick.has_value());
    CHECK(*pick == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("greedy returns nullopt when nothing is feasible") {
    topo::BayesNet bn(topo::CommGraph::line(2));
    CHECK_FALSE(baseline::greedy_constrained_select({0, 1, 2, 3}, bn, path4(), 0.05)
                    .has_value());
}

TEST_CASE("greedy validates the ranking") {
    topo::BayesNet bn(topo::CommGraph::line(2));
    // Ranking must be a permutation of the nodes.
    CHECK_THROWS_AS((void)baseline::greedy_constrained_select({0, 1, 2}, bn, path4(), 1.0),
                    DimensionError);
    CHECK_THROWS_AS((void)baseline::greedy_constrained_select({0, 1, 2, 2}, bn, path4(), 1.0),
                    ParameterError);
    CHECK_THROWS_AS((void)baseline::greedy_constrained_select({0, 1, 2, 3}, bn, path4(), -1.0),
                    ParameterError);
}

TEST_CASE("oracle maximizes and breaks ties lexicographically") {
    topo::BayesNet bn(topo::CommGraph::line(2));
    // Score: sum of picked node ids. Both [2,3] and [3,2] reach 5; the
    // lexicographically smaller one wins.
    auto sum_score = [](const std::vector<std::size_t>& a) {
        return static_cast<double>(std::accumulate(a.begin(), a.end(), 0UL));
    };
    baseline::OracleResult best = baseline::oracle_search(sum_score, bn, path4(), 0.34);
    CHECK(best.assignment == std::vector<std::size_t>{2, 3});
    CHECK(best.score == 5.0);

    auto constant = [](const std::vector<std::size_t>&) { return 1.0; };
    baseline::OracleResult first = baseline::oracle_search(constant, bn, path4(), 0.34);
    CHECK(first.assignment == std::vector<std::size_t>{0, 1});
}

TEST_CASE("oracle propagates infeasibility and the size guard") {
    topo::BayesNet bn(topo::CommGraph::line(2));
    auto constant = [](const std::vector<std::size_t>&) { return 1.0; };
    CHECK_THROWS_AS((void)baseline::oracle_search(constant, bn, path4(), 0.05),
                    InfeasibleError);
    auto wide = topo::DistanceMatrix::from_layout(topo::NodeLayout::grid(1, 13));
    CHECK_THROWS_AS((void)baseline::oracle_search(constant, bn, wide, 1.0), SizeError);
}

TEST_CASE("oracle with the shared probe solves the split task at full reach") {
    data::GeneratedTask t = split_task();
    const eval::Splits sp = train::task_splits(t);
    topo::BayesNet bn(topo::CommGraph::line(3));
    auto dist = topo::DistanceMatrix::from_layout(t.layout);
    auto probe = [&](const std::vector<std::size_t>& a) {
        return eval::probe_accuracy(t.data, a, sp);
    };
    baseline::OracleResult best = baseline::oracle_search(probe, bn, dist, 1.0);
    // Full coverage needs the faint carrier plus at least one strong node.
    CHECK(best.score >= 0.95);
    CHECK(std::find(best.assignment.begin(), best.assignment.end(), 7UL) !=
          best.assignment.end());
    bool has_strong = false;
    for (std::size_t n : best.assignment) has_strong = has_strong || n <= 2;
    CHECK(has_strong);
}
