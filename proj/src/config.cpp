#include "adafed/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

namespace adafed {
namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& what, const std::string& key, int line) {
    throw ConfigError(what + " '" + key + "' (line " + std::to_string(line) + ")");
}

class DocReader {
public:
    explicit DocReader(const ConfigDoc& doc) : doc_(doc) {}

    template <typename T, typename Parse>
    void read(const std::string& section, const std::string& key, T& out, Parse parse) {
        const auto sit = doc_.sections.find(section);
        if (sit == doc_.sections.end()) return;
        const auto kit = sit->second.find(key);
        if (kit == sit->second.end()) return;
        consumed_.push_back(section + "." + key);
        out = parse(kit->second.value, kit->second.line);
    }

    void read_int(const std::string& s, const std::string& k, int& out) {
        read(s, k, out, [&](const std::string& v, int line) {
            try {
                std::size_t pos = 0;
                const int r = std::stoi(v, &pos);
                if (pos != v.size()) throw std::invalid_argument(v);
                return r;
            } catch (const std::exception&) {
                fail("invalid integer for key", s + "." + k, line);
            }
        });
    }

    void read_u64(const std::string& s, const std::string& k, std::uint64_t& out) {
        read(s, k, out, [&](const std::string& v, int line) -> std::uint64_t {
            try {
                std::size_t pos = 0;
                const auto r = std::stoull(v, &pos);
                if (pos != v.size()) throw std::invalid_argument(v);
                return r;
            } catch (const std::exception&) {
                fail("invalid integer for key", s + "." + k, line);
            }
        });
    }

    void read_double(const std::string& s, const std::string& k, double& out) {
        read(s, k, out, [&](const std::string& v, int line) -> double {
            try {
                std::size_t pos = 0;
                const double r = std::stod(v, &pos);
                if (pos != v.size()) throw std::invalid_argument(v);
                return r;
            } catch (const std::exception&) {
                fail("invalid real for key", s + "." + k, line);
            }
        });
    }

    template <typename T>
    void read_enum(const std::string& s, const std::string& k, T& out,
                   std::initializer_list<std::pair<const char*, T>> options) {
        read(s, k, out, [&](const std::string& v, int line) -> T {
            for (const auto& [name, val] : options)
                if (v == name) return val;
            std::string allowed;
            for (const auto& [name, val] : options) {
                if (!allowed.empty()) allowed += "|";
                allowed += name;
            }
            throw ConfigError("invalid value '" + v + "' for key '" + s + "." + k + "' (line " +
                              std::to_string(line) + "); expected one of " + allowed);
        });
    }

    // Every present key must have been consumed by a read_* call.
    void reject_unknown() const {
        for (const auto& [section, keys] : doc_.sections)
            for (const auto& [key, entry] : keys) {
                const std::string full = section + "." + key;
                if (std::find(consumed_.begin(), consumed_.end(), full) == consumed_.end())
                    fail("unknown config key", full, entry.line);
            }
    }

private:
    const ConfigDoc& doc_;
    std::vector<std::string> consumed_;
};

}  // namespace

ConfigDoc parse_config_text(const std::string& text) {
    ConfigDoc doc;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::size_t comment = raw.find('#');
        if (comment != std::string::npos) raw.erase(comment);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("unterminated section header (line " + std::to_string(line_no) + ")");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("empty section name (line " + std::to_string(line_no) + ")");
            doc.sections[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value' (line " + std::to_string(line_no) + ")");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key (line " + std::to_string(line_no) + ")");
        if (section.empty())
            throw ConfigError("key '" + key + "' outside any section (line " +
                              std::to_string(line_no) + ")");
        if (doc.sections[section].count(key))
            fail("duplicate config key", section + "." + key, line_no);
        doc.sections[section][key] = {value, line_no};
    }
    return doc;
}

ConfigDoc load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

FederatedConfig config_from_doc(const ConfigDoc& doc) {
    FederatedConfig c;
    DocReader r(doc);

    r.read_enum("model", "kind", c.model.kind,
                {{"linear", ModelKind::Linear},
                 {"logistic", ModelKind::Logistic},
                 {"mlp2", ModelKind::Mlp2},
                 {"quadratic", ModelKind::Quadratic}});
    r.read_int("model", "input_dim", c.model.input_dim);
    r.read_int("model", "output_dim", c.model.output_dim);
    r.read_int("model", "hidden_dim", c.model.hidden_dim);
    r.read_double("model", "l2_reg", c.model.l2_reg);

    r.read_int("task", "num_classes", c.task.num_classes);
    r.read_int("task", "input_dim", c.task.input_dim);
    r.read_int("task", "samples_per_class", c.task.samples_per_class);
    r.read_double("task", "cluster_spread", c.task.cluster_spread);
    r.read_double("task", "label_noise", c.task.label_noise);
    r.read_u64("task", "seed", c.task.seed);

    r.read_enum("partition", "kind", c.partition.kind,
                {{"shards", PartitionKind::Shards},
                 {"dirichlet", PartitionKind::Dirichlet},
                 {"by_cluster", PartitionKind::ByCluster}});
    r.read_int("partition", "num_clients", c.partition.num_clients);
    r.read_int("partition", "shards_per_client", c.partition.shards_per_client);
    r.read_double("partition", "beta", c.partition.beta);
    r.read_u64("partition", "seed", c.partition.seed);

    r.read_enum("aggregator", "kind", c.aggregator.kind,
                {{"adafed", AggregatorKind::AdaFed},
                 {"fedavg", AggregatorKind::FedAvg},
                 {"mgda", AggregatorKind::MgdaMinNorm}});
    r.read_double("aggregator", "gamma", c.aggregator.gamma);
    r.read_enum("aggregator", "fedavg_weights", c.aggregator.fedavg_weights,
                {{"uniform", FedAvgWeighting::Uniform},
                 {"by_sample_count", FedAvgWeighting::BySampleCount}});

    r.read_enum("schedule", "kind", c.global_lr_schedule.kind,
                {{"constant", ScheduleKind::Constant},
                 {"inverse_t", ScheduleKind::InverseT},
                 {"inverse_sqrt_t", ScheduleKind::InverseSqrtT},
                 {"descent_bound", ScheduleKind::DescentBound}});
    r.read_double("schedule", "base", c.global_lr_schedule.base);

    r.read_int("federation", "rounds", c.rounds);
    r.read_int("federation", "local_epochs", c.local_epochs);
    r.read_double("federation", "local_lr", c.local_lr);
    r.read_enum("federation", "local_optimizer", c.local_optimizer,
                {{"gd", LocalOptimizer::GD}, {"sgd", LocalOptimizer::SGD}});
    r.read_int("federation", "batch_size", c.batch_size);
    r.read_double("federation", "participation_fraction", c.participation_fraction);
    r.read_u64("federation", "seed", c.seed);
    r.read_int("federation", "checkpoint_every", c.checkpoint_every);

    r.reject_unknown();
    validate(c);
    return c;
}

std::string canonical_hash(const ConfigDoc& doc) {
    // Sections and keys sit in ordered maps, so iteration is already the
    // canonical (sorted) order regardless of file layout.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [section, keys] : doc.sections)
        for (const auto& [key, entry] : keys) {
            mix(section);
            mix(".");
            mix(key);
            mix("=");
            mix(entry.value);
            mix("\n");
        }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

AggregatorOverride parse_aggregator_token(const std::string& token, const AggregatorSpec& base,
                                          const ScheduleSpec& base_schedule) {
    AggregatorOverride out;
    out.aggregator = base;
    AggregatorSpec& spec = out.aggregator;

    std::size_t pos = token.find(':');
    const std::string name = token.substr(0, pos);
    if (name == "adafed")
        spec.kind = AggregatorKind::AdaFed;
    else if (name == "fedavg")
        spec.kind = AggregatorKind::FedAvg;
    else if (name == "mgda")
        spec.kind = AggregatorKind::MgdaMinNorm;
    else
        throw ConfigError("unknown aggregator '" + name + "'");

    auto parse_real = [](const std::string& key, const std::string& value) {
        try {
            return std::stod(value);
        } catch (const std::exception&) {
            throw ConfigError("bad " + key + " value '" + value + "'");
        }
    };

    while (pos != std::string::npos) {
        const std::size_t next = token.find(':', pos + 1);
        const std::string opt =
            token.substr(pos + 1, next == std::string::npos ? next : next - pos - 1);
        pos = next;
        const std::size_t eq = opt.find('=');
        if (eq == std::string::npos) throw ConfigError("bad aggregator option '" + opt + "'");
        const std::string key = opt.substr(0, eq);
        const std::string value = opt.substr(eq + 1);
        if (key == "gamma" && spec.kind == AggregatorKind::AdaFed) {
            spec.gamma = parse_real(key, value);
        } else if (key == "weights" && spec.kind == AggregatorKind::FedAvg) {
            if (value == "uniform")
                spec.fedavg_weights = FedAvgWeighting::Uniform;
            else if (value == "by_sample_count")
                spec.fedavg_weights = FedAvgWeighting::BySampleCount;
            else
                throw ConfigError("bad weights value '" + value + "'");
        } else if (key == "schedule") {
            if (!out.schedule) out.schedule = base_schedule;
            if (value == "constant")
                out.schedule->kind = ScheduleKind::Constant;
            else if (value == "inverse_t")
                out.schedule->kind = ScheduleKind::InverseT;
            else if (value == "inverse_sqrt_t")
                out.schedule->kind = ScheduleKind::InverseSqrtT;
            else if (value == "descent_bound")
                out.schedule->kind = ScheduleKind::DescentBound;
            else
                throw ConfigError("bad schedule value '" + value + "'");
        } else if (key == "base") {
            if (!out.schedule) out.schedule = base_schedule;
            out.schedule->base = parse_real(key, value);
            if (out.schedule->base <= 0.0)
                throw ConfigError("schedule base must be positive");
        } else {
            throw ConfigError("aggregator '" + name + "' does not take option '" + key + "'");
        }
    }
    return out;
}

std::string to_string(AggregatorKind kind) {
    switch (kind) {
        case AggregatorKind::AdaFed:
            return "adafed";
        case AggregatorKind::FedAvg:
            return "fedavg";
        case AggregatorKind::MgdaMinNorm:
            return "mgda";
    }
    return "?";
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Linear:
            return "linear";
        case ModelKind::Logistic:
            return "logistic";
        case ModelKind::Mlp2:
            return "mlp2";
        case ModelKind::Quadratic:
            return "quadratic";
    }
    return "?";
}

}  // namespace adafed
