#include "kcsm/stages.hpp"

#include <sstream>
#include <stdexcept>

namespace kcsm {

std::string_view stage_code(AptStage s) {
    switch (s) {
        case AptStage::R: return "R";
        case AptStage::D1: return "D1";
        case AptStage::D2: return "D2";
        case AptStage::C: return "C";
        case AptStage::L: return "L";
        case AptStage::S: return "S";
        case AptStage::P: return "P";
        case AptStage::E: return "E";
        case AptStage::O: return "O";
    }
    return "?";
}

std::string_view stage_name(AptStage s) {
    switch (s) {
        case AptStage::R: return "reconnaissance";
        case AptStage::D1: return "delivery";
        case AptStage::D2: return "delivery-2nd-stage";
        case AptStage::C: return "command-and-control";
        case AptStage::L: return "lateral-movement";
        case AptStage::S: return "discovery";
        case AptStage::P: return "pivoting";
        case AptStage::E: return "exfiltration";
        case AptStage::O: return "objectives";
    }
    return "?";
}

std::optional<AptStage> parse_stage(std::string_view code) {
    for (AptStage s : kAllStages) {
        if (code == stage_code(s)) return s;
    }
    return std::nullopt;
}

std::string StageSet::to_string() const {
    std::string out;
    for (AptStage s : kAllStages) {
        if (!contains(s)) continue;
        if (!out.empty()) out += ',';
        out += stage_code(s);
    }
    return out;
}

std::optional<StageSet> parse_stage_set(std::string_view text) {
    StageSet set;
    std::string token;
    auto flush = [&]() -> bool {
        if (token.empty()) return true;
        auto s = parse_stage(token);
        if (!s) return false;
        set.add(*s);
        token.clear();
        return true;
    };
    for (char c : text) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!flush()) return std::nullopt;
        } else {
            token += c;
        }
    }
    if (!flush()) return std::nullopt;
    if (set.empty()) return std::nullopt;
    return set;
}

bool is_infecting(AptStage s) {
    return s == AptStage::D1 || s == AptStage::L || s == AptStage::P;
}

StageSet assign_stages(DirectionClass d) {
    switch (d) {
        case DirectionClass::Inbound:
            return {AptStage::R, AptStage::D1};
        case DirectionClass::Outbound:
            return {AptStage::D2, AptStage::C, AptStage::E};
        case DirectionClass::InternalSame:
            return {AptStage::L, AptStage::S, AptStage::O};
        case DirectionClass::InternalCross:
            return {AptStage::L, AptStage::S, AptStage::P, AptStage::O};
    }
    return {};
}

StageMachine default_machine() {
    StageMachine m;
    m.infecting = {AptStage::D1, AptStage::L, AptStage::P};
    const StageSet internal_actions = {AptStage::D2, AptStage::C, AptStage::L, AptStage::S,
                                       AptStage::P,  AptStage::E, AptStage::O};
    m.successors[static_cast<size_t>(AptStage::R)] = {AptStage::D1};
    m.successors[static_cast<size_t>(AptStage::D1)] = internal_actions;
    m.successors[static_cast<size_t>(AptStage::D2)] = internal_actions;
    m.successors[static_cast<size_t>(AptStage::C)] = internal_actions;
    m.successors[static_cast<size_t>(AptStage::L)] = internal_actions;
    m.successors[static_cast<size_t>(AptStage::P)] = internal_actions;
    m.successors[static_cast<size_t>(AptStage::S)] = {AptStage::L, AptStage::P, AptStage::S};
    m.successors[static_cast<size_t>(AptStage::E)] = internal_actions;
    m.successors[static_cast<size_t>(AptStage::O)] = internal_actions;
    return m;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

StageMachine parse_machine(std::string_view text) {
    StageMachine m;
    bool saw_infecting = false;
    size_t lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;

        auto fail = [&](const std::string& why) {
            throw std::invalid_argument("machine definition line " + std::to_string(lineno) + ": " + why);
        };
        if (line.rfind("infecting:", 0) == 0) {
            auto set = parse_stage_set(trim(line.substr(10)));
            if (!set) fail("expected stage list after 'infecting:'");
            m.infecting = *set;
            saw_infecting = true;
        } else if (line.rfind("succ:", 0) == 0) {
            auto body = trim(line.substr(5));
            auto arrow = body.find("->");
            if (arrow == std::string_view::npos) fail("expected 'succ: <stage> -> <stages>'");
            auto lhs = parse_stage(trim(body.substr(0, arrow)));
            if (!lhs) fail("unknown stage before '->'");
            auto rhs = parse_stage_set(trim(body.substr(arrow + 2)));
            if (!rhs) fail("expected stage list after '->'");
            auto& image = m.successors[static_cast<size_t>(*lhs)];
            image = image.unite(*rhs);
        } else {
            fail("expected 'infecting:' or 'succ:'");
        }
    }
    if (!saw_infecting) throw std::invalid_argument("machine definition is missing an 'infecting:' line");
    return m;
}

}  // namespace kcsm
