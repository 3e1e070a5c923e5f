#include "exactlab/errors.hpp"
#include "exactlab/logic.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace exactlab;
using namespace exactlab::logic;

namespace {

Predicate P(std::string_view w) {
    const auto p = Vocabulary::standard().find_predicate(w);
    REQUIRE(p);
    return *p;
}

LogicProblem small_example() {
    LogicProblem p;
    p.rules = {{{P("wrong"), P("frail")}, P("impartial")}, {{P("frail")}, P("grumpy")}};
    p.facts = {P("frail")};
    p.query = P("grumpy");
    p.pool = {P("wrong"), P("frail"), P("impartial"), P("grumpy")};
    const auto c = forward_chain(p);
    p.label = c.label;
    p.depth = c.depth;
    return p;
}

// Synchronous rounds from scratch: set k holds everything provable in k rounds.
struct Oracle {
    std::set<Predicate> truth;
    bool label = false;
    std::size_t depth = 0;
};

Oracle oracle(const LogicProblem& p) {
    std::set<Predicate> known(p.facts.begin(), p.facts.end());
    Oracle o;
    std::optional<std::size_t> found;
    if (known.count(p.query)) found = 0;
    std::size_t rounds = 0;
    while (true) {
        std::set<Predicate> next = known;
        for (const auto& r : p.rules)
            if (std::all_of(r.body.begin(), r.body.end(), [&](Predicate b) { return known.count(b) > 0; }))
                next.insert(r.head);
        if (next == known) break;
        ++rounds;
        known = std::move(next);
        if (!found && known.count(p.query)) found = rounds;
    }
    o.truth = known;
    o.label = found.has_value();
    o.depth = found ? *found : rounds;
    return o;
}

GeneratorConfig small_config() {
    GeneratorConfig c;
    c.max_rules = 20;
    return c;
}

}  // namespace

TEST_CASE("vocabulary") {
    const auto& v = Vocabulary::standard();
    CHECK(v.predicates().size() == Vocabulary::kPredicateCount);
    CHECK(v.special_tokens().size() == 17);
    CHECK(v.size() == 167);
    std::set<std::string> all(v.predicates().begin(), v.predicates().end());
    CHECK(all.size() == 150);
    for (const auto& s : v.special_tokens()) CHECK(all.count(s) == 0);
    for (const char* w : {"wrong", "frail", "impartial", "grumpy"}) CHECK(v.find_predicate(w));
    CHECK(v.token(tok::Exhausted) == "No_other_facts_can_be_proven");
    CHECK(v.token(tok::Facts) == "Facts:");
    CHECK(v.token_id("grumpy") == v.predicate_token(P("grumpy")));
    CHECK_FALSE(v.token_id("zzz"));
    for (int id = 0; id < static_cast<int>(v.size()); ++id) CHECK(v.token_id(v.token(id)) == id);
}

TEST_CASE("worked example renders exactly") {
    const auto p = small_example();
    const auto chain = forward_chain(p);
    CHECK(chain.label);
    CHECK(chain.depth == 1);
    CHECK(render(p, RenderStyle::WithReasoning) ==
          "Rules: If wrong and frail then impartial . If frail then grumpy . Facts: frail . Query: grumpy ? "
          "Reasoning: Facts: frail . If frail then grumpy . Newfact: grumpy . Facts: frail , grumpy . Answer: yes");
    CHECK(render(p, RenderStyle::Direct) ==
          "Rules: If wrong and frail then impartial . If frail then grumpy . Facts: frail . Query: grumpy ? Answer: yes");
    CHECK(render_prompt(p) + " " + render_response(nullptr, true) == render(p, RenderStyle::Direct));
}

TEST_CASE("fact query has depth 0 and an empty trace") {
    auto p = small_example();
    p.query = P("frail");
    const auto c = forward_chain(p);
    CHECK(c.label);
    CHECK(c.depth == 0);
    CHECK(c.trace.steps.empty());
    CHECK(c.trace.terminal == Terminal::Proved);
}

TEST_CASE("unprovable query exhausts the rules") {
    LogicProblem p;
    p.facts = {P("wrong")};
    p.rules = {{{P("wrong"), P("frail")}, P("grumpy")}};
    p.query = P("grumpy");
    const auto c = forward_chain(p);
    CHECK_FALSE(c.label);
    CHECK(c.depth == 0);
    CHECK(c.trace.terminal == Terminal::Exhausted);
    const auto text = render(p, RenderStyle::WithReasoning);
    CHECK(text.ends_with("Reasoning: Facts: wrong . No_other_facts_can_be_proven Answer: no"));
    p.rules.push_back({{}, P("frail")});
    CHECK_THROWS_AS(forward_chain(p), InvalidArgument);
}

TEST_CASE("forward chaining agrees with the round oracle on generated problems") {
    const auto cfg = small_config();
    for (auto recipe : {Recipe::RP, Recipe::LP}) {
        for (std::uint64_t i = 0; i < 300; ++i) {
            const auto p = generate(recipe, cfg, 2024, i);
            const auto c = forward_chain(p);
            const auto o = oracle(p);
            REQUIRE(std::set<Predicate>(c.truth.begin(), c.truth.end()) == o.truth);
            REQUIRE(c.label == o.label);
            REQUIRE(c.depth == o.depth);
            REQUIRE(p.label == o.label);
            REQUIRE(p.depth == o.depth);
            REQUIRE(p.depth <= cfg.max_depth);
            REQUIRE(verify_trace(p, c.trace).accepted);
        }
    }
}

TEST_CASE("adding a fact never shrinks the fixed point") {
    const auto cfg = small_config();
    for (std::uint64_t i = 0; i < 100; ++i) {
        auto p = generate(Recipe::RP, cfg, 5, i);
        const auto before = oracle(p).truth;
        p.facts.push_back(p.pool[i % p.pool.size()]);
        const auto after = forward_chain(p).truth;
        CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
    }
}

TEST_CASE("generation is deterministic and respects the config") {
    const auto cfg = small_config();
    for (std::uint64_t i = 0; i < 50; ++i) {
        CHECK(generate(Recipe::RP, cfg, 9, i) == generate(Recipe::RP, cfg, 9, i));
        CHECK(generate(Recipe::LP, cfg, 9, i) == generate(Recipe::LP, cfg, 9, i));
        const auto p = generate(Recipe::RP, cfg, 9, i);
        CHECK(p.recipe == Recipe::RP);
        CHECK(p.pool_size() >= cfg.min_predicates);
        CHECK(p.pool_size() <= cfg.max_predicates);
        CHECK(p.rule_count() <= cfg.max_rules);
        const std::set<Predicate> pool(p.pool.begin(), p.pool.end());
        CHECK(pool.count(p.query));
        for (const auto& r : p.rules) {
            CHECK(r.body.size() >= 1);
            CHECK(r.body.size() <= 3);
            CHECK(pool.count(r.head));
            CHECK(std::find(r.body.begin(), r.body.end(), r.head) == r.body.end());
        }
    }
    CHECK_FALSE(generate(Recipe::RP, cfg, 9, 0) == generate(Recipe::RP, cfg, 10, 0));
}

TEST_CASE("without rules only depth-0 problems exist") {
    GeneratorConfig cfg;
    cfg.max_rules = 0;
    cfg.depth_quota = false;
    for (std::uint64_t i = 0; i < 30; ++i) {
        const auto p = rp_generate(cfg, i);
        CHECK(p.rules.empty());
        CHECK(p.depth == 0);
        const bool is_fact = std::find(p.facts.begin(), p.facts.end(), p.query) != p.facts.end();
        CHECK(p.label == is_fact);
    }
    cfg.depth_quota = true;
    cfg.max_retries = 50;
    // Any nonzero target depth is impossible, so some seed must give up.
    bool gave_up = false;
    for (std::uint64_t i = 0; i < 30 && !gave_up; ++i) {
        try {
            rp_generate(cfg, i);
        } catch (const RetryExhausted&) {
            gave_up = true;
        }
    }
    CHECK(gave_up);
    GeneratorConfig bad;
    bad.min_predicates = 30;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("LP problems are consistent with their intended assignment") {
    const auto cfg = small_config();
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto p = lp_generate(cfg, i);
        const std::set<Predicate> t(p.intended_true.begin(), p.intended_true.end());
        for (const auto f : p.facts) CHECK(t.count(f));
        for (const auto& r : p.rules) {
            const bool body_true = std::all_of(r.body.begin(), r.body.end(), [&](Predicate b) { return t.count(b) > 0; });
            CHECK((!body_true || t.count(r.head) > 0));
        }
        for (const auto q : oracle(p).truth) CHECK(t.count(q));
    }
}

TEST_CASE("label and depth quotas cover the range") {
    const auto cfg = small_config();
    std::set<std::pair<bool, std::size_t>> seen;
    for (std::uint64_t i = 0; i < 400; ++i) {
        const auto p = generate(Recipe::RP, cfg, 3, i);
        seen.insert({p.label, p.depth});
    }
    for (std::size_t d = 0; d <= 3; ++d) {
        CHECK(seen.count({true, d}));
        CHECK(seen.count({false, d}));
    }
}

TEST_CASE("parse inverts render") {
    const auto cfg = small_config();
    for (auto recipe : {Recipe::RP, Recipe::LP}) {
        for (std::uint64_t i = 0; i < 200; ++i) {
            const auto p = generate(recipe, cfg, 77, i);
            const auto c = forward_chain(p);
            for (auto style : {RenderStyle::Direct, RenderStyle::WithReasoning}) {
                const auto text = render(p, style);
                const auto parsed = parse(text);
                REQUIRE(parsed.rules == p.rules);
                REQUIRE(parsed.facts == p.facts);
                REQUIRE(parsed.query == p.query);
                REQUIRE(parsed.response.answer == p.label);
                if (style == RenderStyle::WithReasoning) REQUIRE(parsed.response.trace == c.trace);
                else REQUIRE_FALSE(parsed.response.trace);
                REQUIRE(detokenize(tokenize(text)) == text);
            }
            const auto rec = from_record(to_record(p, i));
            REQUIRE(rec.id == i);
            REQUIRE(rec.problem == p);
            REQUIRE(rec.trace == c.trace);
        }
    }
}

TEST_CASE("parse errors report the token position") {
    try {
        parse("Rules: If frail then . Facts: frail . Query: grumpy ?");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position() == 4);
    }
    CHECK_THROWS_AS(parse("Rules: Facts: zzz . Query: frail ?"), OutOfVocabulary);
    CHECK_THROWS_AS(parse("Rules: Facts: frail . Query: frail"), ParseError);
    CHECK_THROWS_AS(parse("Rules: Facts: frail . Query: frail ? Answer: maybe"), ParseError);
    CHECK_THROWS_AS(tokenize("Facts:  frail"), InvalidArgument);
    CHECK_THROWS_AS(tokenize("Facts: zzz"), OutOfVocabulary);
    CHECK_THROWS_AS(from_record("{not json"), ParseError);
    CHECK_THROWS_AS(from_record("{\"id\": 1}"), ParseError);
    const auto empty = parse_response("");
    CHECK_FALSE(empty.answer);
    CHECK_FALSE(empty.trace);
}

TEST_CASE("trace verifier rejects corrupted traces") {
    const auto cfg = small_config();
    std::size_t checked = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto p = generate(Recipe::RP, cfg, 13, i);
        const auto good = forward_chain(p).trace;
        REQUIRE(verify_trace(p, good).accepted);
        {
            auto bad = good;
            bad.terminal = bad.terminal == Terminal::Proved ? Terminal::Exhausted : Terminal::Proved;
            const auto v = verify_trace(p, bad);
            CHECK_FALSE(v.accepted);
            CHECK(v.violation_step == good.steps.size());
        }
        if (good.steps.empty()) continue;
        ++checked;
        const std::size_t k = i % good.steps.size();
        {
            // A rule that is not in the problem.
            auto bad = good;
            bad.steps[k].rule.body.push_back(bad.steps[k].rule.head);
            const auto v = verify_trace(p, bad);
            CHECK_FALSE(v.accepted);
            CHECK(v.violation_step == k);
        }
        {
            auto bad = good;
            const auto known = bad.steps[k].facts;
            for (const auto q : p.pool)
                if (std::find(known.begin(), known.end(), q) == known.end()) {
                    bad.steps[k].new_fact = q;
                    break;
                }
            if (bad.steps[k].new_fact != good.steps[k].new_fact) {
                const auto v = verify_trace(p, bad);
                CHECK_FALSE(v.accepted);
                CHECK(v.violation_step == k);
            }
        }
        {
            auto bad = good;
            bad.steps.erase(bad.steps.begin() + static_cast<std::ptrdiff_t>(k));
            CHECK_FALSE(verify_trace(p, bad).accepted);
        }
    }
    CHECK(checked > 50);

    const auto p = small_example();
    CHECK(verify_answer(p, true).accepted);
    CHECK(verify_answer(p, true).expected);
    CHECK_FALSE(verify_answer(p, false).accepted);
}
