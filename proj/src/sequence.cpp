#include "spinreg/sequence.hpp"

#include <sstream>

namespace spinreg {

void Sequence::validate() const {
    if (!sweep) return;
    if (sweep->name.empty()) throw ConfigError("sweep parameter needs a name");
    if (sweep->values.empty()) throw ConfigError("sweep '" + sweep->name + "' has an empty grid");
    bool referenced = false;
    for (const auto& item : items) {
        std::visit(
            [&](const auto& it) {
                using T = std::decay_t<decltype(it)>;
                if constexpr (std::is_same_v<T, PulseItem>) {
                    referenced |= it.freq_mhz.is_swept() || it.phase_rad.is_swept() ||
                                  it.duration_us.is_swept();
                } else if constexpr (std::is_same_v<T, DelayItem>) {
                    referenced |= it.duration_us.is_swept();
                } else if constexpr (std::is_same_v<T, LaserItem>) {
                    referenced |= it.duration_us.is_swept();
                }
            },
            item);
    }
    if (!referenced)
        throw ConfigError("sweep '" + sweep->name + "' is not referenced by any item");
}

Sequence toggle_final_phase(const Sequence& seq) {
    Sequence out = seq;
    for (auto it = out.items.rbegin(); it != out.items.rend(); ++it) {
        if (auto* p = std::get_if<PulseItem>(&*it)) {
            p->phase_rad.offset += 3.14159265358979323846;
            return out;
        }
    }
    throw ConfigError("toggle_final_phase: sequence has no pulse");
}

// ------------------------------ serialization ------------------------------

namespace {

std::string bound_to_text(const Bound& b) {
    if (!b.is_swept()) return format_double(b.offset);
    return format_double(b.offset) + "+" + format_double(b.scale) + "*s";
}

Bound bound_from_text(const std::string& s) {
    const auto star = s.find("*s");
    if (star == std::string::npos) return Bound::fixed(parse_double(s));
    if (star + 2 != s.size()) throw ConfigError("bad bound expression '" + s + "'");
    std::string head = s.substr(0, star);
    // split at the '+' that separates offset from scale (scale may be negative)
    std::size_t plus = std::string::npos;
    for (std::size_t i = 1; i < head.size(); ++i) {
        if (head[i] == '+' && head[i - 1] != 'e' && head[i - 1] != 'E') plus = i;
    }
    if (plus == std::string::npos) throw ConfigError("bad bound expression '" + s + "'");
    return Bound{parse_double(head.substr(0, plus)), parse_double(head.substr(plus + 1))};
}

std::string field(const std::vector<std::string>& toks, std::size_t idx, const char* key,
                  int lineno) {
    if (idx >= toks.size())
        throw ConfigError("line " + std::to_string(lineno) + ": missing field " + key);
    const std::string prefix = std::string(key) + "=";
    if (toks[idx].rfind(prefix, 0) != 0)
        throw ConfigError("line " + std::to_string(lineno) + ": expected " + prefix + "..., got '" +
                          toks[idx] + "'");
    return toks[idx].substr(prefix.size());
}

} // namespace

std::string sequence_to_text(const Sequence& seq) {
    std::ostringstream os;
    if (seq.sweep) {
        os << "SWEEP " << seq.sweep->name;
        for (double v : seq.sweep->values) os << ' ' << format_double(v);
        os << '\n';
    }
    for (const auto& item : seq.items) {
        std::visit(
            [&](const auto& it) {
                using T = std::decay_t<decltype(it)>;
                if constexpr (std::is_same_v<T, PulseItem>) {
                    os << (it.channel == Channel::MW ? "MW" : "RF") << " f=" << bound_to_text(it.freq_mhz)
                       << " ph=" << bound_to_text(it.phase_rad) << " rabi=" << format_double(it.rabi_mhz)
                       << " t=" << bound_to_text(it.duration_us) << '\n';
                } else if constexpr (std::is_same_v<T, DelayItem>) {
                    os << "DELAY t=" << bound_to_text(it.duration_us) << '\n';
                } else if constexpr (std::is_same_v<T, LaserItem>) {
                    os << "LASER " << it.transition << " t=" << bound_to_text(it.duration_us) << '\n';
                } else {
                    os << "READ\n";
                }
            },
            item);
    }
    return os.str();
}

Sequence sequence_from_text(const std::string& text) {
    Sequence seq;
    std::istringstream iss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(iss, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto toks = split_ws(line);
        const std::string& op = toks[0];
        if (op == "SWEEP") {
            if (toks.size() < 3)
                throw ConfigError("line " + std::to_string(lineno) + ": SWEEP needs a name and values");
            Sweep sw;
            sw.name = toks[1];
            for (std::size_t i = 2; i < toks.size(); ++i) sw.values.push_back(parse_double(toks[i]));
            seq.sweep = std::move(sw);
        } else if (op == "MW" || op == "RF") {
            PulseItem p;
            p.channel = (op == "MW") ? Channel::MW : Channel::RF;
            p.freq_mhz = bound_from_text(field(toks, 1, "f", lineno));
            p.phase_rad = bound_from_text(field(toks, 2, "ph", lineno));
            p.rabi_mhz = parse_double(field(toks, 3, "rabi", lineno));
            p.duration_us = bound_from_text(field(toks, 4, "t", lineno));
            seq.items.emplace_back(p);
        } else if (op == "DELAY") {
            DelayItem d;
            d.duration_us = bound_from_text(field(toks, 1, "t", lineno));
            seq.items.emplace_back(d);
        } else if (op == "LASER") {
            if (toks.size() < 3)
                throw ConfigError("line " + std::to_string(lineno) + ": LASER needs transition and t=");
            LaserItem l;
            if (toks[1] != "B" && toks[1] != "C")
                throw ConfigError("line " + std::to_string(lineno) + ": laser transition must be B or C");
            l.transition = toks[1][0];
            l.duration_us = bound_from_text(field(toks, 2, "t", lineno));
            seq.items.emplace_back(l);
        } else if (op == "READ") {
            seq.items.emplace_back(ReadItem{});
        } else {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown item '" + op + "'");
        }
    }
    seq.validate();
    return seq;
}

} // namespace spinreg
