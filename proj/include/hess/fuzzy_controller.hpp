#pragma once

// Mamdani fuzzy controller for the battery power share K_bat.
//
// Inputs: normalized demand preq in [-1, 1], battery SOC socbat in [0, 1],
// supercap SOC socsc in [0, 1]. Output kbat in [0, 1].
// Inference is min for AND, max for aggregation, centroid defuzzification
// by trapezoidal integration over a fixed 501-point output grid.
//
// Rule-file grammar (one statement per line, '#' starts a comment):
//
//   mf <variable> <label> tri a b c
//   mf <variable> <label> trap a b c d
//   if <input>=<label> [and <input>=<label>]... then kbat=<label>
//
// Variables are preq, socbat, socsc (inputs) and kbat (output). An input may
// be omitted from a rule antecedent, in which case it does not constrain it.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hess/detail/text.hpp"
#include "hess/errors.hpp"

namespace hess {

enum class MfShape { triangular, trapezoidal };

struct MembershipFunction {
    MfShape shape = MfShape::triangular;
    std::vector<double> breakpoints;
    std::string label;

    double operator()(double x) const {
        double a, b, c, d;
        if (shape == MfShape::triangular) {
            a = breakpoints[0];
            b = c = breakpoints[1];
            d = breakpoints[2];
        } else {
            a = breakpoints[0];
            b = breakpoints[1];
            c = breakpoints[2];
            d = breakpoints[3];
        }
        if (x < a || x > d) return 0.0;
        if (x < b) return (x - a) / (b - a);
        if (x <= c) return 1.0;
        return (d - x) / (d - c);
    }
};

struct LinguisticVariable {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<MembershipFunction> terms;

    int index_of(std::string_view label) const {
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (terms[i].label == label) return static_cast<int>(i);
        }
        return -1;
    }
};

struct FuzzyRule {
    static constexpr int kAny = -1;
    std::array<int, 3> antecedent{kAny, kAny, kAny}; // term index per input, or kAny
    int consequent = 0;
};

inline constexpr int kDefuzzPoints = 501;
inline constexpr int kCoverageGrid = 21;

class FuzzyRuleBase {
public:
    enum Input { preq = 0, socbat = 1, socsc = 2 };

    FuzzyRuleBase() {
        inputs_[preq] = {"preq", -1.0, 1.0, {}};
        inputs_[socbat] = {"socbat", 0.0, 1.0, {}};
        inputs_[socsc] = {"socsc", 0.0, 1.0, {}};
        output_ = {"kbat", 0.0, 1.0, {}};
    }

    const std::array<LinguisticVariable, 3>& inputs() const { return inputs_; }
    const LinguisticVariable& output() const { return output_; }
    const std::vector<FuzzyRule>& rules() const { return rules_; }

    // Firing strength of each rule (min over constrained antecedents).
    std::vector<double> firing_strengths(double p_req_norm, double soc_bat, double soc_sc) const {
        const std::array<double, 3> x{std::clamp(p_req_norm, -1.0, 1.0), std::clamp(soc_bat, 0.0, 1.0),
                                      std::clamp(soc_sc, 0.0, 1.0)};
        std::array<std::vector<double>, 3> mu;
        for (std::size_t v = 0; v < 3; ++v) {
            for (const auto& mf : inputs_[v].terms) mu[v].push_back(mf(x[v]));
        }
        std::vector<double> w(rules_.size(), 1.0);
        for (std::size_t r = 0; r < rules_.size(); ++r) {
            for (std::size_t v = 0; v < 3; ++v) {
                const int t = rules_[r].antecedent[v];
                if (t != FuzzyRule::kAny) w[r] = std::min(w[r], mu[v][static_cast<std::size_t>(t)]);
            }
        }
        return w;
    }

    double evaluate(double p_req_norm, double soc_bat, double soc_sc) const {
        const auto w = firing_strengths(p_req_norm, soc_bat, soc_sc);
        const double step = 1.0 / (kDefuzzPoints - 1);
        double num = 0.0;
        double den = 0.0;
        double prev_y = 0.0;
        double prev_mu = 0.0;
        for (int j = 0; j < kDefuzzPoints; ++j) {
            double mu = 0.0;
            for (std::size_t r = 0; r < rules_.size(); ++r) {
                if (w[r] > 0.0) {
                    mu = std::max(mu, std::min(w[r], sampled_output_[static_cast<std::size_t>(rules_[r].consequent)]
                                                                    [static_cast<std::size_t>(j)]));
                }
            }
            const double y = j * step;
            if (j > 0) {
                num += 0.5 * step * (prev_y * prev_mu + y * mu);
                den += 0.5 * step * (prev_mu + mu);
            }
            prev_y = y;
            prev_mu = mu;
        }
        if (!(den > 0.0)) {
            return 0.5;
        }
        return std::clamp(num / den, 0.0, 1.0);
    }

    friend FuzzyRuleBase load_rule_base(std::istream& in);

private:
    void finalize() {
        sampled_output_.clear();
        for (const auto& mf : output_.terms) {
            std::vector<double> s(kDefuzzPoints);
            for (int j = 0; j < kDefuzzPoints; ++j) s[static_cast<std::size_t>(j)] = mf(j / double(kDefuzzPoints - 1));
            sampled_output_.push_back(std::move(s));
        }
    }

    void check_coverage() const {
        if (rules_.empty()) {
            throw InputError("fuzzy rule base has no rules; no input is covered (witness preq=-1 socbat=0 socsc=0)");
        }
        for (int i = 0; i < kCoverageGrid; ++i) {
            for (int j = 0; j < kCoverageGrid; ++j) {
                for (int k = 0; k < kCoverageGrid; ++k) {
                    const double p = -1.0 + 2.0 * i / (kCoverageGrid - 1);
                    const double sb = double(j) / (kCoverageGrid - 1);
                    const double ss = double(k) / (kCoverageGrid - 1);
                    const auto w = firing_strengths(p, sb, ss);
                    if (*std::max_element(w.begin(), w.end()) <= 0.0) {
                        std::ostringstream msg;
                        msg << "fuzzy rule base does not cover input (witness preq=" << p << " socbat=" << sb
                            << " socsc=" << ss << ")";
                        throw InputError(msg.str());
                    }
                }
            }
        }
        for (int j = 0; j < kDefuzzPoints; ++j) {
            double best = 0.0;
            for (const auto& s : sampled_output_) best = std::max(best, s[static_cast<std::size_t>(j)]);
            if (best <= 0.0) {
                throw InputError("kbat terms do not span [0, 1] (gap at " + std::to_string(j / double(kDefuzzPoints - 1)) +
                                 ")");
            }
        }
    }

    std::array<LinguisticVariable, 3> inputs_;
    LinguisticVariable output_;
    std::vector<FuzzyRule> rules_;
    std::vector<std::vector<double>> sampled_output_;
};

inline FuzzyRuleBase load_rule_base(std::istream& in) {
    FuzzyRuleBase rb;
    auto variable = [&rb](std::string_view name) -> LinguisticVariable* {
        for (auto& v : rb.inputs_) {
            if (v.name == name) return &v;
        }
        return name == rb.output_.name ? &rb.output_ : nullptr;
    };

    struct PendingRule {
        std::size_t line;
        std::vector<std::string_view> tokens;
        std::string text;
    };
    std::vector<PendingRule> pending;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = detail::clean_line(raw, line_no == 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        const auto tok = detail::split_ws(line);
        if (tok[0] == "mf") {
            if (tok.size() < 4) throw ParseError(line_no, "malformed membership function");
            LinguisticVariable* var = variable(tok[1]);
            if (var == nullptr) throw ParseError(line_no, "unknown variable '" + std::string(tok[1]) + "'");
            MembershipFunction mf;
            mf.label = std::string(tok[2]);
            std::size_t expected = 0;
            if (tok[3] == "tri") {
                mf.shape = MfShape::triangular;
                expected = 3;
            } else if (tok[3] == "trap") {
                mf.shape = MfShape::trapezoidal;
                expected = 4;
            } else {
                throw ParseError(line_no, "unknown membership shape '" + std::string(tok[3]) + "'");
            }
            if (tok.size() != 4 + expected) {
                throw ParseError(line_no, "membership shape '" + std::string(tok[3]) + "' needs " +
                                              std::to_string(expected) + " breakpoints");
            }
            for (std::size_t i = 0; i < expected; ++i) {
                const auto v = detail::parse_double(tok[4 + i]);
                if (!v) throw ParseError(line_no, "non-numeric breakpoint '" + std::string(tok[4 + i]) + "'");
                mf.breakpoints.push_back(*v);
            }
            if (!std::is_sorted(mf.breakpoints.begin(), mf.breakpoints.end())) {
                throw ParseError(line_no, "breakpoints of '" + mf.label + "' must be non-decreasing");
            }
            if (var->index_of(mf.label) >= 0) {
                throw ParseError(line_no, "duplicate term '" + mf.label + "' for " + var->name);
            }
            var->terms.push_back(std::move(mf));
        } else if (tok[0] == "if") {
            pending.push_back({line_no, {}, std::string(line)});
        } else {
            throw ParseError(line_no, "expected 'mf' or 'if', got '" + std::string(tok[0]) + "'");
        }
    }

    for (auto& p : pending) {
        const auto tok = detail::split_ws(p.text);
        FuzzyRule rule;
        bool then_seen = false;
        bool consequent_seen = false;
        bool expect_clause = true;
        for (std::size_t i = 1; i < tok.size(); ++i) {
            if (!expect_clause) {
                if (tok[i] == "and" && !then_seen) {
                    expect_clause = true;
                    continue;
                }
                if (tok[i] == "then" && !then_seen) {
                    then_seen = true;
                    expect_clause = true;
                    continue;
                }
                throw ParseError(p.line, "unexpected token '" + std::string(tok[i]) + "'");
            }
            const auto eq = tok[i].find('=');
            if (eq == std::string_view::npos) {
                throw ParseError(p.line, "expected <variable>=<term>, got '" + std::string(tok[i]) + "'");
            }
            const auto name = tok[i].substr(0, eq);
            const auto label = tok[i].substr(eq + 1);
            expect_clause = false;
            if (then_seen) {
                if (name != rb.output_.name || consequent_seen) {
                    throw ParseError(p.line, "consequent must be a single kbat=<term>");
                }
                const int t = rb.output_.index_of(label);
                if (t < 0) throw ParseError(p.line, "unknown term '" + std::string(label) + "' for kbat");
                rule.consequent = t;
                consequent_seen = true;
                continue;
            }
            std::size_t v = 0;
            while (v < 3 && rb.inputs_[v].name != name) ++v;
            if (v == 3) throw ParseError(p.line, "unknown input '" + std::string(name) + "'");
            const int t = rb.inputs_[v].index_of(label);
            if (t < 0) {
                throw ParseError(p.line, "unknown term '" + std::string(label) + "' for " + rb.inputs_[v].name);
            }
            rule.antecedent[v] = t;
        }
        if (!consequent_seen) throw ParseError(p.line, "rule has no 'then kbat=<term>' clause");
        rb.rules_.push_back(rule);
    }

    for (const auto& v : rb.inputs_) {
        if (v.terms.empty()) throw InputError("fuzzy input '" + v.name + "' has no membership functions");
    }
    if (rb.output_.terms.empty()) throw InputError("fuzzy output 'kbat' has no membership functions");

    rb.finalize();
    rb.check_coverage();
    return rb;
}

inline FuzzyRuleBase load_rule_base_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    return load_rule_base(in);
}

inline FuzzyRuleBase load_rule_base_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open rule file '" + path + "'");
    return load_rule_base(in);
}

// Shipped rule base; data/default_rules.fis is a byte-identical copy.
//
// K_bat falls as demand and supercap SOC rise and as battery SOC falls.
// With the supercap near empty the battery carries (almost) everything.
inline constexpr std::string_view kDefaultRuleText = R"(# Default HESS power-split rule base.
# Inputs: preq (demand / peak power, [-1, 1]), socbat, socsc ([0, 1]).
# Output: kbat, the battery share of the demand ([0, 1]).

mf preq Neg  trap -1 -1 -0.2 0
mf preq Low  trap -0.2 0 0.1 0.4
mf preq Med  tri  0.1 0.4 0.7
mf preq High trap 0.4 0.7 1 1

mf socbat Low  trap 0 0 0.2 0.5
mf socbat Med  tri  0.2 0.5 0.8
mf socbat High trap 0.5 0.8 1 1

mf socsc Low  trap 0 0 0.2 0.5
mf socsc Med  tri  0.2 0.5 0.8
mf socsc High trap 0.5 0.8 1 1

mf kbat VL tri 0 0 0.25
mf kbat L  tri 0 0.25 0.5
mf kbat M  tri 0.25 0.5 0.75
mf kbat H  tri 0.5 0.75 1
mf kbat VH tri 0.9 1 1

# Regeneration: the supercap takes the braking energy first.
if preq=Neg then kbat=VL

# Supercap empty: battery carries the load.
if preq=Low  and socbat=Low  and socsc=Low then kbat=VH
if preq=Low  and socbat=Med  and socsc=Low then kbat=VH
if preq=Low  and socbat=High and socsc=Low then kbat=VH
if preq=Med  and socbat=Low  and socsc=Low then kbat=VH
if preq=Med  and socbat=Med  and socsc=Low then kbat=VH
if preq=Med  and socbat=High and socsc=Low then kbat=VH
if preq=High and socbat=Low  and socsc=Low then kbat=VH
if preq=High and socbat=Med  and socsc=Low then kbat=VH
if preq=High and socbat=High and socsc=Low then kbat=VH

# One consequent for mid supercap charge; mixing terms here makes kbat rise with socsc.
if preq=Low  and socbat=Low  and socsc=Med then kbat=H
if preq=Low  and socbat=Med  and socsc=Med then kbat=H
if preq=Low  and socbat=High and socsc=Med then kbat=H
if preq=Med  and socbat=Low  and socsc=Med then kbat=H
if preq=Med  and socbat=Med  and socsc=Med then kbat=H
if preq=Med  and socbat=High and socsc=Med then kbat=H
if preq=High and socbat=Low  and socsc=Med then kbat=H
if preq=High and socbat=Med  and socsc=Med then kbat=H
if preq=High and socbat=High and socsc=Med then kbat=H

if preq=Low  and socbat=Low  and socsc=High then kbat=M
if preq=Low  and socbat=Med  and socsc=High then kbat=M
if preq=Low  and socbat=High and socsc=High then kbat=M
if preq=Med  and socbat=Low  and socsc=High then kbat=L
if preq=Med  and socbat=Med  and socsc=High then kbat=L
if preq=Med  and socbat=High and socsc=High then kbat=L
if preq=High and socbat=Low  and socsc=High then kbat=VL
if preq=High and socbat=Med  and socsc=High then kbat=VL
if preq=High and socbat=High and socsc=High then kbat=L
)";

inline const FuzzyRuleBase& default_rule_base() {
    static const FuzzyRuleBase rb = load_rule_base_text(kDefaultRuleText);
    return rb;
}

inline double normalize_demand(double p_req, double p_peak) { return std::clamp(p_req / p_peak, -1.0, 1.0); }

} // namespace hess
