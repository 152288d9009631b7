#include "coreset/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "coreset/errors.hpp"
#include "coreset/rng.hpp"

namespace coreset {

namespace {

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(std::uint64_t line, const std::string& what) {
    throw FormatError(FormatError::Kind::bad_record, line,
                      "config line " + std::to_string(line) + ": " + what);
}

std::uint64_t parse_u64(const std::string& v, std::uint64_t line,
                        const std::string& name) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        fail(line, name + " expects an unsigned integer, got '" + v + "'");
    }
    return out;
}

double parse_double(const std::string& v, std::uint64_t line,
                    const std::string& name) {
    if (v.empty()) fail(line, name + " expects a number");
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        fail(line, name + " expects a number, got '" + v + "'");
    }
    if (used != v.size()) {
        fail(line, name + " has trailing characters: '" + v + "'");
    }
    return out;
}

bool parse_bool(const std::string& v, std::uint64_t line, const std::string& name) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(line, name + " expects true/false, got '" + v + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& v, std::uint64_t line,
                          const std::string& name, Parse parse) {
    std::vector<T> out;
    std::size_t pos = 0;
    if (trim(v).empty()) fail(line, name + " expects a comma-separated list");
    while (pos <= v.size()) {
        std::size_t next = v.find(',', pos);
        if (next == std::string::npos) next = v.size();
        out.push_back(parse(trim(v.substr(pos, next - pos)), line, name));
        pos = next + 1;
        if (next == v.size()) break;
    }
    return out;
}

}  // namespace

RunConfig default_run_config() {
    RunConfig c;
    c.synth.n = 4000;
    c.synth.d = 16;
    c.synth.m = 10;
    c.synth.s = 1.5;
    c.synth.sigma = 1.0;
    c.synth.gamma = 8.0;

    c.curriculum.prune.n_c = 512;
    c.curriculum.prune.ks = {64, 10};
    c.curriculum.prune.rho = 0.5;
    c.curriculum.prune.eta = 0.0;
    c.curriculum.prune.mode = SampleMode::stochastic;
    c.curriculum.prune.sharpness = 8.0;

    c.curriculum.budget_epochs = 30;
    c.curriculum.warmup = 5;
    c.curriculum.prune_every = 5;
    c.curriculum.val_fraction = 0.05;
    c.curriculum.probe_every = 0;
    c.curriculum.probe_k = 20;

    c.trainer = TrainerHyper{};
    c.d_emb = 8;
    return c;
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg = default_run_config();
    std::istringstream in(text);
    std::string raw;
    std::uint64_t lineno = 0;
    std::string section;

    while (std::getline(in, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "synth" && section != "prune" && section != "curriculum" &&
                section != "trainer" && section != "probe") {
                fail(lineno, "unknown section [" + section + "]");
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(lineno, "empty key");
        if (section.empty()) fail(lineno, "key '" + key + "' outside any section");
        const std::string name = "[" + section + "]." + key;

        auto range = [&](bool ok, const std::string& what) {
            if (!ok) fail(lineno, name + " " + what);
        };

        if (section == "synth") {
            if (key == "n") {
                cfg.synth.n = parse_u64(value, lineno, name);
                range(cfg.synth.n >= 1, "must be >= 1");
            } else if (key == "d") {
                cfg.synth.d = parse_u64(value, lineno, name);
                range(cfg.synth.d >= 1, "must be >= 1");
            } else if (key == "concepts") {
                cfg.synth.m = parse_u64(value, lineno, name);
                range(cfg.synth.m >= 2, "must be >= 2");
            } else if (key == "zipf") {
                cfg.synth.s = parse_double(value, lineno, name);
                range(cfg.synth.s >= 0.0, "must be >= 0");
            } else if (key == "sigma") {
                cfg.synth.sigma = parse_double(value, lineno, name);
                range(cfg.synth.sigma >= 0.0, "must be >= 0");
            } else if (key == "gamma") {
                cfg.synth.gamma = parse_double(value, lineno, name);
                range(cfg.synth.gamma > 0.0, "must be > 0");
            } else {
                fail(lineno, "unknown key " + name);
            }
        } else if (section == "prune") {
            PruneConfig& p = cfg.curriculum.prune;
            if (key == "n_c") {
                p.n_c = parse_u64(value, lineno, name);
                range(p.n_c >= 1, "must be >= 1");
            } else if (key == "ks") {
                auto ks = parse_list<std::uint64_t>(value, lineno, name, parse_u64);
                p.ks.assign(ks.begin(), ks.end());
                for (std::size_t i = 0; i < p.ks.size(); ++i) {
                    range(p.ks[i] >= 1, "entries must be >= 1");
                    if (i > 0) range(p.ks[i] <= p.ks[i - 1], "must be non-increasing");
                }
            } else if (key == "keep") {
                p.rho = parse_double(value, lineno, name);
                range(p.rho > 0.0 && p.rho <= 1.0, "must be in (0,1]");
            } else if (key == "discard") {
                const double discard = parse_double(value, lineno, name);
                range(discard >= 0.0 && discard < 1.0, "must be in [0,1)");
                p.rho = 1.0 - discard;
            } else if (key == "eta") {
                p.eta = parse_double(value, lineno, name);
                range(p.eta >= 0.0 && p.eta <= 1.0, "must be in [0,1]");
            } else if (key == "mode") {
                if (value == "stochastic") {
                    p.mode = SampleMode::stochastic;
                } else if (value == "band") {
                    p.mode = SampleMode::deterministic_band;
                } else {
                    fail(lineno, name + " expects stochastic|band, got '" + value + "'");
                }
            } else if (key == "sharpness") {
                p.sharpness = parse_double(value, lineno, name);
                range(p.sharpness > 0.0, "must be > 0");
            } else if (key == "normalize") {
                p.normalize = parse_bool(value, lineno, name);
            } else if (key == "mass_weighted") {
                p.mass_weighted = parse_bool(value, lineno, name);
            } else if (key == "tol") {
                p.tol = parse_double(value, lineno, name);
                range(p.tol >= 0.0, "must be >= 0");
            } else if (key == "max_iters") {
                p.max_iters = parse_u64(value, lineno, name);
                range(p.max_iters >= 1, "must be >= 1");
            } else if (key == "restarts") {
                p.restarts = parse_u64(value, lineno, name);
                range(p.restarts >= 1, "must be >= 1");
            } else {
                fail(lineno, "unknown key " + name);
            }
        } else if (section == "curriculum") {
            CurriculumConfig& c = cfg.curriculum;
            if (key == "budget") {
                c.budget_epochs = parse_u64(value, lineno, name);
                range(c.budget_epochs >= 1, "must be >= 1");
            } else if (key == "warmup") {
                c.warmup = parse_u64(value, lineno, name);
                range(c.warmup >= 1, "must be >= 1");
            } else if (key == "prune_every") {
                c.prune_every = parse_u64(value, lineno, name);
                range(c.prune_every >= 1, "must be >= 1");
            } else if (key == "eta_sequence") {
                c.eta_sequence =
                    parse_list<double>(value, lineno, name, parse_double);
                for (double eta : c.eta_sequence) {
                    range(eta >= 0.0 && eta <= 1.0, "entries must be in [0,1]");
                }
            } else if (key == "val_fraction") {
                c.val_fraction = parse_double(value, lineno, name);
                range(c.val_fraction >= 0.0 && c.val_fraction <= 0.5,
                      "must be in [0, 0.5]");
            } else if (key == "async") {
                c.async_prune = parse_bool(value, lineno, name);
            } else {
                fail(lineno, "unknown key " + name);
            }
        } else if (section == "trainer") {
            TrainerHyper& t = cfg.trainer;
            if (key == "lr") {
                t.lr = parse_double(value, lineno, name);
                range(t.lr >= 0.0, "must be >= 0");
            } else if (key == "tau") {
                t.tau = parse_double(value, lineno, name);
                range(t.tau > 0.0, "must be > 0");
            } else if (key == "noise") {
                t.noise = parse_double(value, lineno, name);
                range(t.noise >= 0.0, "must be >= 0");
            } else if (key == "dropout") {
                t.dropout = parse_double(value, lineno, name);
                range(t.dropout >= 0.0 && t.dropout < 1.0, "must be in [0,1)");
            } else if (key == "batch") {
                t.batch = parse_u64(value, lineno, name);
                range(t.batch >= 2, "must be >= 2");
            } else if (key == "weight_decay") {
                t.weight_decay = parse_double(value, lineno, name);
                range(t.weight_decay >= 0.0, "must be >= 0");
            } else if (key == "d_emb") {
                cfg.d_emb = parse_u64(value, lineno, name);
                range(cfg.d_emb >= 1, "must be >= 1");
            } else {
                fail(lineno, "unknown key " + name);
            }
        } else {  // probe
            if (key == "k") {
                cfg.curriculum.probe_k = parse_u64(value, lineno, name);
                range(cfg.curriculum.probe_k >= 1, "must be >= 1");
            } else if (key == "every") {
                cfg.curriculum.probe_every = parse_u64(value, lineno, name);
            } else {
                fail(lineno, "unknown key " + name);
            }
        }
    }
    return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::uint64_t config_text_hash(const std::string& text) {
    return fnv1a64(text);
}

}  // namespace coreset
