#include "support.hpp"

using namespace proxsplit;
using namespace proxsplit::test;
using Catch::Approx;

TEST_CASE("N = 1 reduces to the classical proximal point step") {
    const Problem p = scalar_quad_problem(1, 5);
    RunOptions opt;
    opt.x0 = vec({4});
    opt.retain_iterates = true;
    const Trace t = run_cyclic(p, make_schedule(1, 1), make_stopping_rule(1e-12, 1), opt);
    REQUIRE(t.iterates->size() == 2);
    CHECK((*t.iterates)[1][0] == Approx(4.0 / 3.0).margin(1e-9));
    CHECK(t.records.front().step_norm == Approx(8.0 / 3.0).margin(1e-9));
}

TEST_CASE("zero components stop after one projection cycle") {
    const Problem p(uniform_box(2, 0, 1), {quad_component(Matrix::Zero(2, 2))});
    RunOptions opt;
    opt.x0 = vec({3, -1});
    opt.retain_iterates = true;
    const Trace t = run_cyclic(p, make_schedule(1, 1), make_stopping_rule(1e-8, 100), opt);
    CHECK(t.terminated == Termination::EpsilonReached);
    // x0 is projected before the first cycle, so that cycle already stands still.
    REQUIRE(t.records.size() == 1);
    CHECK(t.records[0].step_norm == 0.0);
    CHECK(t.final_point == vec({1, 0}));
}

TEST_CASE("cyclic mode equals permuted run with the fixed cyclic source") {
    const Problem p = gen_instance({6, 2, 0.3});
    const auto sched = make_schedule(1, 1);
    const auto stop = make_stopping_rule(1e-6, 500);
    const Trace a = run_cyclic(p, sched, stop);
    const Trace b = run_permuted(p, sched, PermutationSource::cyclic(), stop);
    CHECK(trace_csv(a, a.records.size(), TimingMode::Sidecar) == trace_csv(b, b.records.size(), TimingMode::Sidecar));
    CHECK(a.final_point == b.final_point);
}

TEST_CASE("two identical components behave like one applied twice") {
    Matrix m(2, 2);
    m << 1, 0.2, 0.2, 0.5;
    const Component c = quad_component(m);
    const Box box = uniform_box(2, 0, 5);
    const Problem two(box, {c, c});
    const Problem one(box, {c});
    RunOptions opt;
    opt.retain_iterates = true;
    const auto sched = make_schedule(1, 1);
    const Trace t2 = run_cyclic(two, sched, make_stopping_rule(1e-14, 20), opt);
    Vector x = box.midpoint();
    for (std::uint64_t k = 0; k < 20; ++k) {
        x = prox_component(c, x, sched(k), box).x;
        x = prox_component(c, x, sched(k), box).x;
        CHECK(((*t2.iterates)[2 * (k + 1)] - x).norm() == 0.0);
    }
    (void)one;
    CHECK(check_cycle_inequality(t2, two, Vector::Zero(2)).violations == 0);
}

TEST_CASE("single cycle equals the manual composition") {
    const Problem p = gen_instance({5, 4, 0.3});
    RunOptions opt;
    opt.retain_iterates = true;
    const Trace t = run_cyclic(p, make_schedule(0.7, 1), make_stopping_rule(1e-12, 1), opt);
    Vector x = p.box().midpoint();
    for (const auto& c : p.components()) x = prox_component(c, x, 0.7, p.box()).x;
    CHECK((t.final_point - x).norm() == 0.0);
}

TEST_CASE("stochastic with N = 1 matches Method 1") {
    const Problem p = scalar_quad_problem(1, 5);
    const auto sched = make_schedule(1, 1);
    const auto stop = make_stopping_rule(1e-9, 1000);
    const Trace a = run_cyclic(p, sched, stop);
    const Trace b = run_stochastic(p, sched, IndexSampler(99, 1), stop);
    CHECK(a.records.size() == b.records.size());
    CHECK(a.final_point == b.final_point);
}

TEST_CASE("stochastic with identical components does not depend on the seed") {
    const Component c = quad_component(Matrix::Identity(3, 3));
    const Problem p(uniform_box(3, 0, 5), {c, c, c});
    const auto sched = make_schedule(1, 1);
    const auto stop = make_stopping_rule(1e-9, 2000);
    const Trace a = run_stochastic(p, sched, IndexSampler(1, 3), stop);
    const Trace b = run_stochastic(p, sched, IndexSampler(2, 3), stop);
    CHECK(trace_csv(a, a.records.size(), TimingMode::Sidecar) == trace_csv(b, b.records.size(), TimingMode::Sidecar));
}

TEST_CASE("runs are deterministic and feasible") {
    const Problem p = gen_instance({8, 1, 0.3});
    const auto sched = make_schedule(1, 1);
    const auto stop = make_stopping_rule(1e-8, 3000);
    RunOptions opt;
    opt.retain_iterates = true;
    for (const Method m : {Method::Cyclic, Method::Permuted, Method::Stochastic}) {
        const Trace a = run_method(p, m, sched, 7, stop, opt);
        const Trace b = run_method(p, m, sched, 7, stop, opt);
        CHECK(trace_csv(a, a.records.size(), TimingMode::Sidecar) ==
              trace_csv(b, b.records.size(), TimingMode::Sidecar));
        for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].k == i);
        for (const auto& x : *a.iterates) CHECK(p.box().contains(x));
        if (a.terminated == Termination::EpsilonReached) CHECK(a.records.back().step_norm <= stop.epsilon);
    }
}

TEST_CASE("permuted runs depend on their seed") {
    const Problem p = gen_instance({8, 1, 0.3});
    const auto sched = make_schedule(1, 1);
    const auto stop = make_stopping_rule(1e-8, 50);
    CHECK(run_method(p, Method::Permuted, sched, 1, stop, {}).final_point !=
          run_method(p, Method::Permuted, sched, 2, stop, {}).final_point);
}

TEST_CASE("Method 1 stops by epsilon before the cap on the paper family") {
    for (const Index n : {Index{5}, Index{20}}) {
        const Problem p = gen_instance({n, 0, 0.3});
        const Trace t = run_cyclic(p, make_schedule(1, 1), make_stopping_rule(1e-8, 100000));
        CHECK(t.terminated == Termination::EpsilonReached);
        CHECK(t.iterations() < 100000);
    }
}

TEST_CASE("Method 1 reaches the oracle minimum on n = 20") {
    const Problem p = gen_instance({20, 0, 0.3});
    const auto o = oracle_minimize(p);
    const Trace t = run_cyclic(p, make_schedule(1, 1), make_stopping_rule(1e-8, 100000));
    CHECK(t.final_value - o.f_star <= 1e-6);
    CHECK(t.final_value - o.f_star >= -1e-10);
}

TEST_CASE("schedule validation against betaMin") {
    const Problem p(Box(vec({1, 0}), vec({2, 5})),
                    {Component::from_pieces({BlockPiece::linlog(0)}), quad_component(Matrix::Identity(2, 2))});
    const auto stop = make_stopping_rule(1e-14, 100);
    CHECK_THROWS_AS(run_cyclic(p, make_schedule(1, 1), stop), ConfigError);
    RunOptions force;
    force.force = true;
    const Trace t = run_cyclic(p, make_schedule(1, 1), stop, force);
    CHECK(t.below_certified_beta);
    CHECK_NOTHROW(run_cyclic(p, make_schedule(100, 1), stop));
}

TEST_CASE("sampler size must match the problem") {
    const Problem p = scalar_quad_problem(1, 5);
    CHECK_THROWS_AS(run_stochastic(p, make_schedule(1, 1), IndexSampler(1, 2), make_stopping_rule(1e-8, 10)),
                    std::invalid_argument);
}

TEST_CASE("remark_step_bound examples") {
    const Problem p1 = scalar_quad_problem(1, 5).with_lipschitz(1);
    CHECK(remark_step_bound(p1, 2, 0) == Approx(1.0));
    std::vector<Component> five(5, quad_component(Matrix::Identity(1, 1)));
    const Problem p5 = Problem(uniform_box(1, 0, 5), five).with_lipschitz(2);
    CHECK(remark_step_bound(p5, 3, 0) == Approx(0.025));
    CHECK(remark_step_bound(p5, 1, 1) == 0.0);
    CHECK(remark_step_bound(p5, 0, 1) == 0.0);
}
