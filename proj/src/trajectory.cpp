#include "asploop/trajectory.hpp"

#include <sstream>
#include <stdexcept>

#include "asploop/parser.hpp"

namespace asploop {

std::string to_string(Label l) { return l == Label::chosen ? "chosen" : "rejected"; }

const CandidateEncoding* Step::selected() const {
    if (!selected_index || *selected_index >= candidates.size()) return nullptr;
    return &candidates[*selected_index];
}

const std::string& default_preamble() {
    static const std::string text =
        "You translate logic grid puzzles into Answer Set Programming (ASP) for the clingo solver.\n"
        "Work in steps: first declare every entity as a fact, then write a choice rule that generates\n"
        "candidate assignments, then translate each hint into rules or constraints.\n"
        "\n"
        "Reminders:\n"
        "- Facts may pool arguments: color(red;green;blue).\n"
        "- A basic choice rule: 1 {assignment(X, Y) : cat2(Y)} 1 :- cat1(X).\n"
        "- Rule out overlaps between two distinct assignments with a cardinality head:\n"
        "  {X1 = X2; Y1 = Y2} = 0 :- assignment(X1, Y1), assignment(X2, Y2), (X1, Y1) != (X2, Y2).\n"
        "- Logical OR comes in several forms. Exclusive or over comparisons: {A = x; B = y} = 1 :- body.\n"
        "  Inclusive or: use a constraint that forbids both parts being false.\n"
        "- A constraint :- body. removes every answer set in which the body holds.\n"
        "- Use helper predicates or arithmetic (+, -) for numeric relations, e.g. P1 = P2 + 10.\n"
        "- Only use lowercase constants; write numbers without units.\n";
    return text;
}

const std::string& base_request() {
    static const std::string text =
        "Write the ASP facts for all entities and the choice rule that generates the assignments. "
        "Answer with ASP code only.";
    return text;
}

const std::string& hint_request() {
    static const std::string text =
        "Translate this hint into ASP rules or constraints using the predicates above. Answer with ASP code only.";
    return text;
}

std::string render_catalog(const PuzzleInstance& instance) {
    std::string s = "Entities:\n";
    for (const auto& c : instance.categories) {
        s += "- " + c.name + ": ";
        for (std::size_t i = 0; i < c.members.size(); ++i) {
            if (i) s += ", ";
            s += c.members[i];
        }
        s += "\n";
    }
    return s;
}

namespace {

std::string fenced(const std::string& code) {
    std::string s = "```asp\n" + code;
    if (!code.empty() && code.back() != '\n') s += '\n';
    return s + "```\n";
}

}  // namespace

std::string build_base_prompt(const PuzzleInstance& instance, const std::vector<Exemplar>& shots,
                              const std::string& preamble) {
    if (shots.size() > 2) throw std::invalid_argument("build_base_prompt: at most two exemplars");
    std::string s = preamble;
    if (!s.empty() && s.back() != '\n') s += '\n';
    for (std::size_t i = 0; i < shots.size(); ++i) {
        s += "\n## Example " + std::to_string(i + 1) + "\n" + shots[i].input;
        if (!shots[i].input.empty() && shots[i].input.back() != '\n') s += '\n';
        s += "\n### Encoding\n" + fenced(shots[i].encoding);
    }
    s += "\n## Puzzle\n" + instance.description + "\n\n" + render_catalog(instance) + "\n" + base_request() + "\n";
    return s;
}

std::string build_hint_prompt(const Trajectory& trajectory, const std::string& hint) {
    if (trajectory.steps.empty()) throw std::logic_error("build_hint_prompt: empty trajectory");
    std::string s;
    for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
        const Step& st = trajectory.steps[i];
        const CandidateEncoding* sel = st.selected();
        if (!sel) throw std::logic_error("build_hint_prompt: step " + std::to_string(i) + " has no selection");
        if (i == 0) s += st.input_text;
        else s += "\n### Hint\n" + st.input_text + "\n" + hint_request() + "\n";
        s += "\n### Encoding\n" + fenced(sel->text);
    }
    s += "\n### Hint\n" + hint + "\n" + hint_request() + "\n";
    return s;
}

std::string combine(const Trajectory& trajectory, const CandidateEncoding* extra) {
    if (trajectory.steps.empty() && !extra) throw std::logic_error("combine: no base step");
    std::string s;
    bool first = true;
    auto add = [&](const std::string& block) {
        if (!first) s += '\n';
        s += block;
        first = false;
    };
    for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
        const CandidateEncoding* sel = trajectory.steps[i].selected();
        if (!sel) throw std::logic_error("combine: step " + std::to_string(i) + " has no selection");
        add(sel->text);
    }
    if (extra) add(extra->text);
    return s;
}

namespace {

bool parses(std::string_view text) {
    try {
        return !asp::parse_program(text).empty();
    } catch (const asp::AspError&) {
        return false;
    }
}

}  // namespace

std::string extract_code(std::string_view raw) {
    auto open = raw.find("```");
    if (open != std::string_view::npos) {
        auto body = raw.find('\n', open);
        if (body != std::string_view::npos) {
            ++body;
            auto close = raw.find("```", body);
            std::string_view code = raw.substr(body, close == std::string_view::npos ? raw.npos : close - body);
            while (!code.empty() && (code.back() == '\n' || code.back() == '\r')) code.remove_suffix(1);
            return std::string(code);
        }
    }
    if (parses(raw)) return std::string(raw);
    std::istringstream in{std::string(raw)};
    std::string kept;
    for (std::string line; std::getline(in, line);) {
        if (!parses(line)) continue;
        if (!kept.empty()) kept += '\n';
        kept += line;
    }
    return kept.empty() ? std::string(raw) : kept;
}

}  // namespace asploop
