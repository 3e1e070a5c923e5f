#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace exactlab::logic {

/// Index into Vocabulary::predicates().
using Predicate = std::uint16_t;

/// Fixed token inventory: 17 special tokens (ids 0..16, in the order below)
/// followed by 150 predicate words (ids 17..166).
class Vocabulary {
public:
    static constexpr std::size_t kPredicateCount = 150;

    static const Vocabulary& standard();

    const std::vector<std::string>& special_tokens() const { return special_; }
    const std::vector<std::string>& predicates() const { return predicates_; }
    std::size_t size() const { return special_.size() + predicates_.size(); }

    const std::string& word(Predicate p) const;
    std::optional<Predicate> find_predicate(std::string_view word) const;

    /// Token id of any word, special or predicate.
    std::optional<int> token_id(std::string_view word) const;
    const std::string& token(int id) const;
    int predicate_token(Predicate p) const { return static_cast<int>(special_.size()) + p; }

private:
    Vocabulary();
    std::vector<std::string> special_;
    std::vector<std::string> predicates_;
};

/// Ids of the special tokens.
namespace tok {
inline constexpr int Facts = 0, Rules = 1, Query = 2, Answer = 3, Reasoning = 4, Newfact = 5, Yes = 6, No = 7,
                     And = 8, Is = 9, Since = 10, If = 11, Then = 12, QuestionMark = 13, Period = 14, Comma = 15,
                     Exhausted = 16;
}

/// Definite clause body -> head. Body order is kept for rendering.
struct Rule {
    std::vector<Predicate> body;
    Predicate head = 0;

    /// Same head and same body as a set.
    bool same_clause(const Rule& other) const;
    friend bool operator==(const Rule&, const Rule&) = default;
};

enum class Recipe { Manual, RP, LP };
std::string to_string(Recipe r);

struct LogicProblem {
    /// Predicates available to the generator; facts, rules and query draw from it.
    std::vector<Predicate> pool;
    std::vector<Rule> rules;
    std::vector<Predicate> facts;
    Predicate query = 0;
    bool label = false;
    std::size_t depth = 0;
    Recipe recipe = Recipe::Manual;
    /// LP only: the truth assignment the rules were made consistent with.
    std::vector<Predicate> intended_true;

    std::size_t pool_size() const { return pool.size(); }
    std::size_t rule_count() const { return rules.size(); }

    friend bool operator==(const LogicProblem&, const LogicProblem&) = default;
};

enum class Terminal { Proved, Exhausted };

struct TraceStep {
    Rule rule;
    Predicate new_fact = 0;
    /// Known facts after this step, in derivation order.
    std::vector<Predicate> facts;

    friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct ReasoningTrace {
    std::vector<Predicate> initial_facts;
    std::vector<TraceStep> steps;
    Terminal terminal = Terminal::Exhausted;

    friend bool operator==(const ReasoningTrace&, const ReasoningTrace&) = default;
};

struct ChainResult {
    /// Least fixed point, sorted.
    std::vector<Predicate> truth;
    bool label = false;
    /// Round in which the query was derived (0 for a fact); for an underivable
    /// query, the number of productive rounds before the fixed point.
    std::size_t depth = 0;
    ReasoningTrace trace;
};

/// Throws InvalidArgument for a rule with an empty body.
ChainResult forward_chain(const LogicProblem& problem);

struct GeneratorConfig {
    std::size_t min_predicates = 5;
    std::size_t max_predicates = 20;
    std::size_t min_rules = 0;
    std::size_t max_rules = 40;
    std::size_t min_body = 1;
    std::size_t max_body = 3;
    std::size_t max_depth = 6;
    double yes_probability = 0.5;
    /// Draw the target depth uniformly from 0..max_depth before sampling, so
    /// every depth is represented.
    bool depth_quota = true;
    std::size_t max_retries = 100000;

    /// Throws InvalidArgument on inconsistent ranges.
    void validate() const;
};

LogicProblem rp_generate(const GeneratorConfig& config, std::uint64_t seed);
LogicProblem lp_generate(const GeneratorConfig& config, std::uint64_t seed);

/// Problem `index` of a dataset drawn with `master_seed`.
LogicProblem generate(Recipe recipe, const GeneratorConfig& config, std::uint64_t master_seed, std::uint64_t index);

enum class RenderStyle { Direct, WithReasoning };

/// "Rules: ... Facts: ... Query: q ? [Reasoning: ...] Answer: yes".
/// WithReasoning renders `trace`, or the forward-chaining trace when absent.
std::string render(const LogicProblem& problem, RenderStyle style,
                   const std::optional<ReasoningTrace>& trace = std::nullopt);

/// The prompt alone, ending with "?".
std::string render_prompt(const LogicProblem& problem);

/// Continuation after the prompt: "[Reasoning: ...] Answer: yes".
std::string render_response(const ReasoningTrace* trace, bool answer);

struct ParsedResponse {
    std::optional<ReasoningTrace> trace;
    std::optional<bool> answer;
};

struct ParsedText {
    std::vector<Rule> rules;
    std::vector<Predicate> facts;
    Predicate query = 0;
    ParsedResponse response;
};

/// Inverse of render. Throws ParseError (token position, reason) or
/// OutOfVocabulary.
ParsedText parse(std::string_view text);

/// Parses a continuation produced by render_response. An empty string parses
/// to an empty response.
ParsedResponse parse_response(std::string_view text);

/// Single-space separated words to ids. Throws OutOfVocabulary or
/// InvalidArgument on irregular spacing.
std::vector<int> tokenize(std::string_view text);
std::string detokenize(const std::vector<int>& ids);

struct TraceVerdict {
    bool accepted = true;
    /// Index of the first bad step; steps.size() for a bad terminal.
    std::optional<std::size_t> violation_step;
    std::string reason;
};

TraceVerdict verify_trace(const LogicProblem& problem, const ReasoningTrace& trace);

struct AnswerVerdict {
    bool accepted = false;
    bool expected = false;
};

AnswerVerdict verify_answer(const LogicProblem& problem, bool answer);

/// Structured line-delimited record with words spelled out. Includes the
/// forward-chaining trace.
std::string to_record(const LogicProblem& problem, std::uint64_t id);

struct Record {
    std::uint64_t id = 0;
    LogicProblem problem;
    std::optional<ReasoningTrace> trace;
};

/// Throws ParseError on malformed JSON or OutOfVocabulary.
Record from_record(std::string_view line);

}  // namespace exactlab::logic
