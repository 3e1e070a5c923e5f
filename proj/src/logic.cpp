#include "exactlab/logic.hpp"

#include "exactlab/errors.hpp"
#include "exactlab/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <bitset>
#include <cctype>
#include <unordered_map>

namespace exactlab::logic {

namespace {

constexpr std::array<const char*, 17> kSpecial = {
    "Facts:", "Rules:", "Query:", "Answer:", "Reasoning:", "Newfact:", "yes", "no", "and",
    "Is",     "Since",  "If",     "then",    "?",          ".",        ",",   "No_other_facts_can_be_proven",
};

// 150 common English adjectives.
constexpr std::array<const char*, Vocabulary::kPredicateCount> kWords = {
    "wrong",    "frail",     "impartial", "grumpy",   "angry",    "anxious",    "ashamed",  "bashful",
    "bitter",   "bold",      "brave",     "breezy",   "bright",   "brisk",      "calm",     "careful",
    "cautious", "charming",  "cheerful",  "clever",   "clumsy",   "cold",       "confident", "content",
    "cranky",   "crazy",     "cruel",     "curious",  "daring",   "dazzling",   "decent",   "defiant",
    "delightful", "eager",   "earnest",   "elegant",  "energetic", "envious",   "evil",     "excited",
    "faithful", "famous",    "fancy",     "fearless", "fierce",   "foolish",    "fragile",  "frank",
    "friendly", "funny",     "gentle",    "gifted",   "gloomy",   "glorious",   "graceful", "greedy",
    "happy",    "harsh",     "hasty",     "healthy",  "helpful",  "helpless",   "honest",   "hopeful",
    "hostile",  "humble",    "hungry",    "innocent", "jealous",  "jolly",      "joyful",   "keen",
    "kind",     "lazy",      "lively",    "lonely",   "loud",     "loving",     "loyal",    "lucky",
    "mean",     "messy",     "mighty",    "modest",   "moody",    "naive",      "nasty",    "naughty",
    "nervous",  "nice",      "noble",     "noisy",    "obedient", "odd",        "patient",  "peaceful",
    "picky",    "pleasant",  "polite",    "poor",     "proud",    "quick",      "quiet",    "rapid",
    "rare",     "reckless",  "relaxed",   "rich",     "rough",    "rude",       "sad",      "scary",
    "selfish",  "shy",       "silly",     "sincere",  "sleepy",   "slow",       "smart",    "sneaky",
    "soft",     "sour",      "stern",     "strange",  "strict",   "strong",     "stubborn", "sweet",
    "swift",    "tame",      "tender",    "tense",    "thankful", "thirsty",    "tidy",     "timid",
    "tired",    "tough",     "trusty",    "ugly",     "upset",    "vain",       "vast",     "vivid",
    "warm",     "wary",      "weak",      "weary",    "wicked",   "wild",
};

using PredSet = std::bitset<Vocabulary::kPredicateCount>;

PredSet to_set(const std::vector<Predicate>& v) {
    PredSet s;
    for (Predicate p : v) s.set(p);
    return s;
}

std::vector<Predicate> sorted_members(const PredSet& s) {
    std::vector<Predicate> out;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.test(i)) out.push_back(static_cast<Predicate>(i));
    return out;
}

bool body_holds(const Rule& r, const PredSet& known) {
    return std::all_of(r.body.begin(), r.body.end(), [&](Predicate p) { return known.test(p); });
}

void check_predicate(Predicate p) {
    if (p >= Vocabulary::kPredicateCount) throw InvalidArgument("predicate id out of range");
}

void check_rules(const std::vector<Rule>& rules) {
    for (const auto& r : rules) {
        if (r.body.empty()) throw InvalidArgument("rule with empty body");
        check_predicate(r.head);
        for (Predicate p : r.body) check_predicate(p);
    }
}

// Portable draws; the standard distributions are implementation-defined.
std::size_t below(Rng& rng, std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) { return lo + below(rng, hi - lo + 1); }

bool coin(Rng& rng, double p) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p; }

// k distinct elements of `from`, in draw order.
std::vector<Predicate> sample_distinct(Rng& rng, std::vector<Predicate> from, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) std::swap(from[i], from[i + below(rng, from.size() - i)]);
    from.resize(k);
    return from;
}

// Per-predicate derivation round under synchronous rounds; -1 if never derived.
struct Rounds {
    std::array<int, Vocabulary::kPredicateCount> round;
    std::size_t productive = 0;
    PredSet truth;
};

Rounds compute_rounds(const std::vector<Rule>& rules, const std::vector<Predicate>& facts) {
    Rounds r;
    r.round.fill(-1);
    for (Predicate p : facts) {
        r.truth.set(p);
        r.round[p] = 0;
    }
    for (int k = 1;; ++k) {
        PredSet fresh;
        for (const auto& rule : rules)
            if (!r.truth.test(rule.head) && body_holds(rule, r.truth)) fresh.set(rule.head);
        if (fresh.none()) break;
        for (std::size_t i = 0; i < fresh.size(); ++i)
            if (fresh.test(i)) r.round[i] = k;
        r.truth |= fresh;
        r.productive = static_cast<std::size_t>(k);
    }
    return r;
}

ReasoningTrace chain_trace(const LogicProblem& problem) {
    ReasoningTrace trace;
    trace.initial_facts = problem.facts;
    std::vector<Predicate> running = problem.facts;
    PredSet known = to_set(running);
    while (true) {
        if (known.test(problem.query)) {
            trace.terminal = Terminal::Proved;
            return trace;
        }
        const auto it = std::find_if(problem.rules.begin(), problem.rules.end(), [&](const Rule& r) {
            return !known.test(r.head) && body_holds(r, known);
        });
        if (it == problem.rules.end()) {
            trace.terminal = Terminal::Exhausted;
            return trace;
        }
        known.set(it->head);
        running.push_back(it->head);
        trace.steps.push_back({*it, it->head, running});
    }
}

Rule random_rule(Rng& rng, const std::vector<Predicate>& pool, const GeneratorConfig& cfg) {
    const std::size_t hi = std::min(cfg.max_body, pool.size() - 1);
    const std::size_t lo = std::min(cfg.min_body, hi);
    const std::size_t size = between(rng, lo, hi);
    auto picked = sample_distinct(rng, pool, size + 1);
    Rule r;
    r.head = picked.back();
    picked.pop_back();
    r.body = std::move(picked);
    return r;
}

bool contains_clause(const std::vector<Rule>& rules, const Rule& r) {
    return std::any_of(rules.begin(), rules.end(), [&](const Rule& o) { return o.same_clause(r); });
}

struct Skeleton {
    std::vector<Predicate> pool;
    std::vector<Predicate> facts;
    std::vector<Rule> rules;
    std::vector<Predicate> intended_true;
};

std::vector<Predicate> all_predicates() {
    std::vector<Predicate> v(Vocabulary::kPredicateCount);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<Predicate>(i);
    return v;
}

Skeleton rp_skeleton(Rng& rng, const GeneratorConfig& cfg) {
    Skeleton s;
    s.pool = sample_distinct(rng, all_predicates(), between(rng, cfg.min_predicates, cfg.max_predicates));
    const std::size_t k = s.pool.size();
    s.facts = sample_distinct(rng, s.pool, between(rng, 1, std::max<std::size_t>(1, k / 2)));
    const std::size_t target = between(rng, cfg.min_rules, cfg.max_rules);
    for (std::size_t attempt = 0; s.rules.size() < target && attempt < 20 * target; ++attempt) {
        Rule r = random_rule(rng, s.pool, cfg);
        if (!contains_clause(s.rules, r)) s.rules.push_back(std::move(r));
    }
    return s;
}

Skeleton lp_skeleton(Rng& rng, const GeneratorConfig& cfg) {
    Skeleton s;
    s.pool = sample_distinct(rng, all_predicates(), between(rng, cfg.min_predicates, cfg.max_predicates));
    const std::size_t k = s.pool.size();
    s.intended_true = sample_distinct(rng, s.pool, between(rng, 1, k - 1));
    const PredSet intended = to_set(s.intended_true);
    s.facts = sample_distinct(rng, s.intended_true, between(rng, 1, std::max<std::size_t>(1, s.intended_true.size() / 2)));
    const std::size_t target = between(rng, cfg.min_rules, cfg.max_rules);
    for (std::size_t attempt = 0; s.rules.size() < target && attempt < 20 * target; ++attempt) {
        Rule r = random_rule(rng, s.pool, cfg);
        // A rule whose body is all intended-true must not conclude a false head.
        if (body_holds(r, intended) && !intended.test(r.head)) continue;
        if (!contains_clause(s.rules, r)) s.rules.push_back(std::move(r));
    }
    return s;
}

LogicProblem generate_with(Recipe recipe, const GeneratorConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    const bool want_yes = coin(rng, cfg.yes_probability);
    const std::size_t want_depth = cfg.depth_quota ? between(rng, 0, cfg.max_depth) : 0;
    const auto depth_ok = [&](std::size_t depth) {
        return cfg.depth_quota ? depth == want_depth : depth <= cfg.max_depth;
    };

    for (std::size_t attempt = 0; attempt < cfg.max_retries; ++attempt) {
        Skeleton s = recipe == Recipe::LP ? lp_skeleton(rng, cfg) : rp_skeleton(rng, cfg);
        const Rounds rounds = compute_rounds(s.rules, s.facts);
        std::vector<Predicate> candidates;
        if (want_yes) {
            for (Predicate p : s.pool) {
                const int r = rounds.round[p];
                if (r < 0) continue;
                if (depth_ok(static_cast<std::size_t>(r))) candidates.push_back(p);
            }
        } else {
            if (depth_ok(rounds.productive))
                for (Predicate p : s.pool)
                    if (!rounds.truth.test(p)) candidates.push_back(p);
        }
        if (candidates.empty()) continue;

        LogicProblem problem;
        problem.recipe = recipe;
        problem.query = candidates[below(rng, candidates.size())];
        problem.pool = std::move(s.pool);
        problem.rules = std::move(s.rules);
        problem.facts = std::move(s.facts);
        problem.intended_true = std::move(s.intended_true);
        const ChainResult chain = forward_chain(problem);
        problem.label = chain.label;
        problem.depth = chain.depth;
        return problem;
    }
    throw RetryExhausted(to_string(recipe) + " generation found no problem with the requested label and depth after " +
                         std::to_string(cfg.max_retries) + " attempts");
}

// Whitespace-split token stream with positions for error reports.
class Cursor {
public:
    explicit Cursor(std::string_view text) {
        std::size_t i = 0;
        while (i < text.size()) {
            while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
            std::size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
            if (j > i) words_.emplace_back(text.substr(i, j - i));
            i = j;
        }
    }

    bool done() const { return pos_ >= words_.size(); }
    std::size_t position() const { return pos_; }

    bool peek(std::string_view w) const { return !done() && words_[pos_] == w; }

    void expect(std::string_view w) {
        if (!peek(w)) fail("expected '" + std::string(w) + "'");
        ++pos_;
    }

    bool accept(std::string_view w) {
        if (!peek(w)) return false;
        ++pos_;
        return true;
    }

    Predicate predicate() {
        if (done()) fail("expected a predicate");
        const auto& vocab = Vocabulary::standard();
        const auto p = vocab.find_predicate(words_[pos_]);
        if (!p) {
            if (!vocab.token_id(words_[pos_])) throw OutOfVocabulary(words_[pos_]);
            fail("expected a predicate, got '" + words_[pos_] + "'");
        }
        ++pos_;
        return *p;
    }

    [[noreturn]] void fail(const std::string& reason) const {
        if (done()) throw ParseError(pos_, reason + " at end of text");
        throw ParseError(pos_, reason + ", got '" + words_[pos_] + "'");
    }

private:
    std::vector<std::string> words_;
    std::size_t pos_ = 0;
};

// "p , q , r ." or "."
std::vector<Predicate> parse_fact_list(Cursor& c) {
    std::vector<Predicate> out;
    if (c.accept(".")) return out;
    out.push_back(c.predicate());
    while (c.accept(",")) out.push_back(c.predicate());
    c.expect(".");
    return out;
}

// "If p and q then r ."
Rule parse_rule(Cursor& c) {
    Rule r;
    c.expect("If");
    r.body.push_back(c.predicate());
    while (c.accept("and")) r.body.push_back(c.predicate());
    c.expect("then");
    r.head = c.predicate();
    c.expect(".");
    return r;
}

ParsedResponse parse_response_at(Cursor& c) {
    ParsedResponse out;
    if (c.accept("Reasoning:")) {
        ReasoningTrace t;
        c.expect("Facts:");
        t.initial_facts = parse_fact_list(c);
        while (c.peek("If")) {
            TraceStep step;
            step.rule = parse_rule(c);
            c.expect("Newfact:");
            step.new_fact = c.predicate();
            c.expect(".");
            c.expect("Facts:");
            step.facts = parse_fact_list(c);
            t.steps.push_back(std::move(step));
        }
        t.terminal = c.accept("No_other_facts_can_be_proven") ? Terminal::Exhausted : Terminal::Proved;
        out.trace = std::move(t);
    }
    if (c.accept("Answer:")) {
        if (c.accept("yes"))
            out.answer = true;
        else if (c.accept("no"))
            out.answer = false;
        else
            c.fail("expected 'yes' or 'no'");
    }
    if (!c.done()) c.fail("unexpected trailing token");
    return out;
}

void append_list(std::string& s, const std::vector<Predicate>& facts) {
    const auto& vocab = Vocabulary::standard();
    for (std::size_t i = 0; i < facts.size(); ++i) {
        if (i) s += " ,";
        s += ' ';
        s += vocab.word(facts[i]);
    }
    s += " .";
}

void append_rule(std::string& s, const Rule& r) {
    const auto& vocab = Vocabulary::standard();
    s += " If";
    for (std::size_t i = 0; i < r.body.size(); ++i) {
        if (i) s += " and";
        s += ' ';
        s += vocab.word(r.body[i]);
    }
    s += " then ";
    s += vocab.word(r.head);
    s += " .";
}

using nlohmann::json;

json words(const std::vector<Predicate>& v) {
    json a = json::array();
    for (Predicate p : v) a.push_back(Vocabulary::standard().word(p));
    return a;
}

json rule_json(const Rule& r) { return {{"body", words(r.body)}, {"head", Vocabulary::standard().word(r.head)}}; }

Predicate pred_from(const json& j) {
    const auto w = j.get<std::string>();
    const auto p = Vocabulary::standard().find_predicate(w);
    if (!p) throw OutOfVocabulary(w);
    return *p;
}

std::vector<Predicate> preds_from(const json& j) {
    std::vector<Predicate> v;
    for (const auto& e : j) v.push_back(pred_from(e));
    return v;
}

Rule rule_from(const json& j) { return {preds_from(j.at("body")), pred_from(j.at("head"))}; }

}  // namespace

Vocabulary::Vocabulary() : special_(kSpecial.begin(), kSpecial.end()), predicates_(kWords.begin(), kWords.end()) {}

const Vocabulary& Vocabulary::standard() {
    static const Vocabulary v;
    return v;
}

const std::string& Vocabulary::word(Predicate p) const {
    check_predicate(p);
    return predicates_[p];
}

std::optional<Predicate> Vocabulary::find_predicate(std::string_view w) const {
    const auto id = token_id(w);
    if (!id || *id < static_cast<int>(special_.size())) return std::nullopt;
    return static_cast<Predicate>(*id - static_cast<int>(special_.size()));
}

std::optional<int> Vocabulary::token_id(std::string_view w) const {
    static const auto index = [this] {
        std::unordered_map<std::string_view, int> m;
        for (std::size_t i = 0; i < size(); ++i) m.emplace(token(static_cast<int>(i)), static_cast<int>(i));
        return m;
    }();
    const auto it = index.find(w);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= size()) throw InvalidArgument("token id out of range");
    const auto i = static_cast<std::size_t>(id);
    return i < special_.size() ? special_[i] : predicates_[i - special_.size()];
}

bool Rule::same_clause(const Rule& other) const {
    if (head != other.head || body.size() != other.body.size()) return false;
    auto a = body, b = other.body;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

std::string to_string(Recipe r) {
    switch (r) {
        case Recipe::RP: return "RP";
        case Recipe::LP: return "LP";
        case Recipe::Manual: break;
    }
    return "manual";
}

ChainResult forward_chain(const LogicProblem& problem) {
    check_rules(problem.rules);
    check_predicate(problem.query);
    for (Predicate p : problem.facts) check_predicate(p);

    const Rounds rounds = compute_rounds(problem.rules, problem.facts);
    ChainResult out;
    out.truth = sorted_members(rounds.truth);
    out.label = rounds.truth.test(problem.query);
    out.depth = out.label ? static_cast<std::size_t>(rounds.round[problem.query]) : rounds.productive;
    out.trace = chain_trace(problem);
    return out;
}

void GeneratorConfig::validate() const {
    if (min_predicates < 2 || min_predicates > max_predicates || max_predicates > Vocabulary::kPredicateCount)
        throw InvalidArgument("predicate pool range must satisfy 2 <= min <= max <= 150");
    if (min_rules > max_rules) throw InvalidArgument("min_rules exceeds max_rules");
    if (min_body < 1 || min_body > max_body) throw InvalidArgument("rule body range must satisfy 1 <= min <= max");
    if (!(yes_probability >= 0.0 && yes_probability <= 1.0))
        throw InvalidArgument("yes_probability must lie in [0, 1]");
    if (max_retries == 0) throw InvalidArgument("max_retries must be positive");
}

LogicProblem rp_generate(const GeneratorConfig& config, std::uint64_t seed) {
    return generate_with(Recipe::RP, config, seed);
}

LogicProblem lp_generate(const GeneratorConfig& config, std::uint64_t seed) {
    return generate_with(Recipe::LP, config, seed);
}

LogicProblem generate(Recipe recipe, const GeneratorConfig& config, std::uint64_t master_seed, std::uint64_t index) {
    if (recipe == Recipe::Manual) throw InvalidArgument("generate needs the RP or LP recipe");
    return generate_with(recipe, config, derive_seed(master_seed, index));
}

std::string render_prompt(const LogicProblem& problem) {
    std::string s = "Rules:";
    for (const auto& r : problem.rules) append_rule(s, r);
    s += " Facts:";
    append_list(s, problem.facts);
    s += " Query: ";
    s += Vocabulary::standard().word(problem.query);
    s += " ?";
    return s;
}

std::string render_response(const ReasoningTrace* trace, bool answer) {
    std::string s;
    if (trace) {
        s += "Reasoning: Facts:";
        append_list(s, trace->initial_facts);
        for (const auto& step : trace->steps) {
            append_rule(s, step.rule);
            s += " Newfact: ";
            s += Vocabulary::standard().word(step.new_fact);
            s += " . Facts:";
            append_list(s, step.facts);
        }
        if (trace->terminal == Terminal::Exhausted) s += " No_other_facts_can_be_proven";
        s += ' ';
    }
    s += answer ? "Answer: yes" : "Answer: no";
    return s;
}

std::string render(const LogicProblem& problem, RenderStyle style, const std::optional<ReasoningTrace>& trace) {
    std::string s = render_prompt(problem);
    s += ' ';
    if (style == RenderStyle::Direct) return s + render_response(nullptr, problem.label);
    if (trace) return s + render_response(&*trace, problem.label);
    const ReasoningTrace t = forward_chain(problem).trace;
    return s + render_response(&t, problem.label);
}

ParsedText parse(std::string_view text) {
    Cursor c(text);
    ParsedText out;
    c.expect("Rules:");
    while (c.peek("If")) out.rules.push_back(parse_rule(c));
    c.expect("Facts:");
    out.facts = parse_fact_list(c);
    c.expect("Query:");
    out.query = c.predicate();
    c.expect("?");
    out.response = parse_response_at(c);
    return out;
}

ParsedResponse parse_response(std::string_view text) {
    Cursor c(text);
    return parse_response_at(c);
}

std::vector<int> tokenize(std::string_view text) {
    std::vector<int> ids;
    if (text.empty()) return ids;
    const auto& vocab = Vocabulary::standard();
    std::size_t start = 0;
    while (true) {
        const std::size_t end = text.find(' ', start);
        const std::string_view w = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
        if (w.empty()) throw InvalidArgument("tokens must be separated by single spaces");
        const auto id = vocab.token_id(w);
        if (!id) throw OutOfVocabulary(std::string(w));
        ids.push_back(*id);
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return ids;
}

std::string detokenize(const std::vector<int>& ids) {
    const auto& vocab = Vocabulary::standard();
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) s += ' ';
        s += vocab.token(ids[i]);
    }
    return s;
}

TraceVerdict verify_trace(const LogicProblem& problem, const ReasoningTrace& trace) {
    auto reject = [](std::size_t step, std::string reason) {
        return TraceVerdict{false, step, std::move(reason)};
    };
    PredSet known = to_set(problem.facts);
    if (to_set(trace.initial_facts) != known || trace.initial_facts.size() != problem.facts.size())
        return reject(0, "initial facts differ from the problem facts");

    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& step = trace.steps[i];
        const bool listed = std::any_of(problem.rules.begin(), problem.rules.end(),
                                        [&](const Rule& r) { return r.same_clause(step.rule); });
        if (!listed) return reject(i, "fired rule is not in the problem");
        if (!body_holds(step.rule, known)) return reject(i, "rule body is not contained in the known facts");
        if (known.test(step.rule.head)) return reject(i, "rule head is already known");
        if (step.new_fact != step.rule.head) return reject(i, "new fact is not the rule head");
        known.set(step.new_fact);
        if (to_set(step.facts) != known || step.facts.size() != known.count())
            return reject(i, "fact snapshot does not match the running fact set");
    }

    const std::size_t end = trace.steps.size();
    if (trace.terminal == Terminal::Proved) {
        if (!known.test(problem.query)) return reject(end, "trace claims proof but the query is not derived");
    } else {
        if (known.test(problem.query)) return reject(end, "trace claims exhaustion but the query is derived");
        for (const auto& r : problem.rules)
            if (!known.test(r.head) && body_holds(r, known))
                return reject(end, "trace claims exhaustion but a rule can still fire");
    }
    return {};
}

AnswerVerdict verify_answer(const LogicProblem& problem, bool answer) {
    const bool expected = forward_chain(problem).label;
    return {answer == expected, expected};
}

std::string to_record(const LogicProblem& problem, std::uint64_t id) {
    const ChainResult chain = forward_chain(problem);
    json steps = json::array();
    for (const auto& s : chain.trace.steps)
        steps.push_back({{"rule", rule_json(s.rule)},
                         {"new_fact", Vocabulary::standard().word(s.new_fact)},
                         {"facts", words(s.facts)}});
    json rules = json::array();
    for (const auto& r : problem.rules) rules.push_back(rule_json(r));

    json j;
    j["id"] = id;
    j["recipe"] = to_string(problem.recipe);
    j["pool"] = words(problem.pool);
    j["rules"] = std::move(rules);
    j["facts"] = words(problem.facts);
    j["query"] = Vocabulary::standard().word(problem.query);
    j["label"] = problem.label ? "yes" : "no";
    j["depth"] = problem.depth;
    j["intended_true"] = words(problem.intended_true);
    j["trace"] = {{"initial_facts", words(chain.trace.initial_facts)},
                  {"steps", std::move(steps)},
                  {"terminal", chain.trace.terminal == Terminal::Proved ? "proved" : "exhausted"}};
    return j.dump();
}

Record from_record(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(e.byte, e.what());
    }
    try {
        Record rec;
        rec.id = j.at("id").get<std::uint64_t>();
        auto& p = rec.problem;
        const auto recipe = j.at("recipe").get<std::string>();
        p.recipe = recipe == "RP" ? Recipe::RP : recipe == "LP" ? Recipe::LP : Recipe::Manual;
        p.pool = preds_from(j.at("pool"));
        for (const auto& r : j.at("rules")) p.rules.push_back(rule_from(r));
        p.facts = preds_from(j.at("facts"));
        p.query = pred_from(j.at("query"));
        p.label = j.at("label").get<std::string>() == "yes";
        p.depth = j.at("depth").get<std::size_t>();
        if (j.contains("intended_true")) p.intended_true = preds_from(j.at("intended_true"));
        if (j.contains("trace")) {
            const auto& t = j.at("trace");
            ReasoningTrace trace;
            trace.initial_facts = preds_from(t.at("initial_facts"));
            for (const auto& s : t.at("steps"))
                trace.steps.push_back({rule_from(s.at("rule")), pred_from(s.at("new_fact")), preds_from(s.at("facts"))});
            trace.terminal = t.at("terminal").get<std::string>() == "proved" ? Terminal::Proved : Terminal::Exhausted;
            rec.trace = std::move(trace);
        }
        return rec;
    } catch (const json::exception& e) {
        throw ParseError(0, std::string("malformed record: ") + e.what());
    }
}

}  // namespace exactlab::logic
