#include "gait/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "gait/errors.hpp"

namespace gait {

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace {

constexpr const char* kMagic = "gaitbench-ckpt";

double parse_double_strict(const std::string& s) {
    double out = 0.0;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw MalformedFileError("checkpoint: bad number '" + s + "'");
    }
    return out;
}

long long parse_ll_strict(const std::string& s) {
    long long out = 0;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw MalformedFileError("checkpoint: bad integer '" + s + "'");
    }
    return out;
}

std::string fp_to_hex(std::uint64_t fp) {
    char buf[17];
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[fp & 0xF];
        fp >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

std::uint64_t fp_from_hex(const std::string& s) {
    if (s.size() != 16) throw MalformedFileError("checkpoint: bad fingerprint '" + s + "'");
    std::uint64_t fp = 0;
    for (char c : s) {
        fp <<= 4;
        if (c >= '0' && c <= '9') fp |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') fp |= static_cast<std::uint64_t>(c - 'a' + 10);
        else throw MalformedFileError("checkpoint: bad fingerprint '" + s + "'");
    }
    return fp;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

class Writer {
public:
    void net(const std::string& name, const Mlp& m) {
        out_ << "net " << name << ' '
             << (m.out_act == OutputAct::Sigmoid ? "sigmoid" : "identity");
        for (int d : m.dims) out_ << ' ' << d;
        out_ << '\n';
        std::vector<double> flat(m.p.flat_size());
        m.p.flatten_into(flat);
        values(flat);
    }

    void vec(const std::string& name, const std::vector<double>& v) {
        out_ << "vec " << name << ' ' << v.size() << '\n';
        values(v);
    }

    void adam(const std::string& net_name, const AdamState& st) {
        out_ << "adam " << net_name << ' ' << st.step_count << ' ' << format_double(st.beta1)
             << ' ' << format_double(st.beta2) << ' ' << format_double(st.epsilon_stab) << '\n';
        std::vector<double> flat(2 * st.first_moment.flat_size());
        st.first_moment.flatten_into({flat.data(), flat.size() / 2});
        st.second_moment.flatten_into({flat.data() + flat.size() / 2, flat.size() / 2});
        values(flat);
    }

    void adam_vec(const std::string& vec_name, const AdamVecState& st) {
        out_ << "adamvec " << vec_name << ' ' << st.step_count << ' ' << format_double(st.beta1)
             << ' ' << format_double(st.beta2) << ' ' << format_double(st.epsilon_stab) << '\n';
        std::vector<double> flat;
        flat.reserve(2 * st.first_moment.size());
        flat.insert(flat.end(), st.first_moment.begin(), st.first_moment.end());
        flat.insert(flat.end(), st.second_moment.begin(), st.second_moment.end());
        values(flat);
    }

    std::string finish() {
        out_ << "end\n";
        return out_.str();
    }

    std::ostringstream out_;

private:
    void values(const std::vector<double>& v) {
        out_ << "params " << v.size() << '\n';
        for (double x : v) out_ << format_double(x) << '\n';
    }
};

class Reader {
public:
    explicit Reader(const std::string& text) : in_(text) {}

    std::string line() {
        std::string l;
        if (!std::getline(in_, l)) throw MalformedFileError("checkpoint: unexpected end of file");
        if (!l.empty() && l.back() == '\r') l.pop_back();
        return l;
    }

    std::vector<double> params() {
        const auto head = split_ws(line());
        if (head.size() != 2 || head[0] != "params") {
            throw MalformedFileError("checkpoint: expected a params block");
        }
        const long long n = parse_ll_strict(head[1]);
        if (n < 0) throw MalformedFileError("checkpoint: negative params count");
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(n));
        for (long long i = 0; i < n; ++i) out.push_back(parse_double_strict(line()));
        return out;
    }

private:
    std::istringstream in_;
};

struct LoadedSections {
    std::map<std::string, Mlp> nets;
    std::map<std::string, std::vector<double>> vecs;
    std::map<std::string, AdamState> adams;       // keyed by net name
    std::map<std::string, AdamVecState> adam_vecs;  // keyed by vec name
};

Mlp net_from_tokens(const std::vector<std::string>& tok, const std::vector<double>& flat) {
    // net <name> <act> <dims...>
    if (tok.size() < 5) throw MalformedFileError("checkpoint: short net header");
    Mlp m;
    if (tok[2] == "sigmoid") m.out_act = OutputAct::Sigmoid;
    else if (tok[2] == "identity") m.out_act = OutputAct::Identity;
    else throw MalformedFileError("checkpoint: unknown activation '" + tok[2] + "'");
    for (std::size_t i = 3; i < tok.size(); ++i) {
        const long long d = parse_ll_strict(tok[i]);
        if (d < 1) throw MalformedFileError("checkpoint: bad layer dim");
        m.dims.push_back(static_cast<int>(d));
    }
    if (m.dims.size() < 2) throw MalformedFileError("checkpoint: net needs at least two dims");
    for (std::size_t l = 0; l + 1 < m.dims.size(); ++l) {
        m.p.w.emplace_back(m.dims[l + 1], m.dims[l]);
        m.p.b.emplace_back(m.dims[l + 1], 0.0);
    }
    if (static_cast<int>(flat.size()) != m.p.flat_size()) {
        throw MalformedFileError("checkpoint: net parameter count mismatch");
    }
    m.p.unflatten_from(flat);
    return m;
}

const Mlp& require_net(const LoadedSections& s, const std::string& name) {
    const auto it = s.nets.find(name);
    if (it == s.nets.end()) {
        throw MalformedFileError("checkpoint: missing required net '" + name + "'");
    }
    return it->second;
}

AdamState adam_or_fresh(const LoadedSections& s, const std::string& name, const Mlp& net) {
    const auto it = s.adams.find(name);
    if (it == s.adams.end()) return make_adam(net);
    if (!it->second.first_moment.same_shape(net.p)) {
        throw MalformedFileError("checkpoint: adam state shape mismatch for '" + name + "'");
    }
    return it->second;
}

}  // namespace

std::string checkpoint_to_text(const TrainedAgent& agent, std::uint64_t env_fingerprint) {
    Writer w;
    w.out_ << kMagic << ' ' << kCheckpointVersion << '\n';
    w.out_ << "algorithm " << agent.algorithm << '\n';
    w.out_ << "env_fp " << fp_to_hex(env_fingerprint) << '\n';

    if (const auto* d = std::get_if<DdpgAgent>(&agent.agent)) {
        w.net("actor", d->actor);
        w.adam("actor", d->actor_opt);
        w.net("critic", d->critic);
        w.adam("critic", d->critic_opt);
        w.net("target_actor", d->target_actor);
        w.net("target_critic", d->target_critic);
    } else if (const auto* p = std::get_if<PpoAgent>(&agent.agent)) {
        w.net("policy_mean", p->policy.mean);
        w.adam("policy_mean", p->policy_opt);
        w.net("value", p->value);
        w.adam("value", p->value_opt);
        w.vec("log_std", p->policy.log_std);
        w.adam_vec("log_std", p->log_std_opt);
    } else if (const auto* t = std::get_if<TrpoAgent>(&agent.agent)) {
        w.net("policy_mean", t->policy.mean);
        w.net("value", t->value);
        w.adam("value", t->value_opt);
        w.vec("log_std", t->policy.log_std);
    } else {
        throw UsageError("checkpoint: agent holds no trained model");
    }
    return w.finish();
}

TrainedAgent checkpoint_from_text(const std::string& text, const AlgoConfigs& configs,
                                  std::uint64_t expected_env_fingerprint,
                                  bool allow_env_mismatch) {
    Reader r(text);

    const auto magic = split_ws(r.line());
    if (magic.size() != 2 || magic[0] != kMagic) {
        throw MalformedFileError("checkpoint: not a gaitbench checkpoint");
    }
    if (parse_ll_strict(magic[1]) != kCheckpointVersion) {
        throw VersionError("checkpoint: unsupported format version " + magic[1]);
    }

    const auto algo_line = split_ws(r.line());
    if (algo_line.size() != 2 || algo_line[0] != "algorithm") {
        throw MalformedFileError("checkpoint: missing algorithm line");
    }
    const std::string algorithm = algo_line[1];

    const auto fp_line = split_ws(r.line());
    if (fp_line.size() != 2 || fp_line[0] != "env_fp") {
        throw MalformedFileError("checkpoint: missing env_fp line");
    }
    const std::uint64_t fp = fp_from_hex(fp_line[1]);
    if (fp != expected_env_fingerprint && !allow_env_mismatch) {
        throw CompatibilityError(
            "checkpoint: environment fingerprint mismatch (checkpoint " + fp_to_hex(fp) +
            ", current config " + fp_to_hex(expected_env_fingerprint) + ")");
    }

    LoadedSections sections;
    std::string pending_name;
    for (;;) {
        const std::string raw = r.line();
        if (raw == "end") break;
        const auto tok = split_ws(raw);
        if (tok.empty()) throw MalformedFileError("checkpoint: blank line inside body");
        if (tok[0] == "net") {
            const auto flat = r.params();
            sections.nets[tok[1]] = net_from_tokens(tok, flat);
        } else if (tok[0] == "vec") {
            if (tok.size() != 3) throw MalformedFileError("checkpoint: bad vec header");
            const auto flat = r.params();
            if (static_cast<long long>(flat.size()) != parse_ll_strict(tok[2])) {
                throw MalformedFileError("checkpoint: vec length mismatch");
            }
            sections.vecs[tok[1]] = flat;
        } else if (tok[0] == "adam") {
            if (tok.size() != 6) throw MalformedFileError("checkpoint: bad adam header");
            pending_name = tok[1];
            AdamState st;
            st.step_count = parse_ll_strict(tok[2]);
            st.beta1 = parse_double_strict(tok[3]);
            st.beta2 = parse_double_strict(tok[4]);
            st.epsilon_stab = parse_double_strict(tok[5]);
            const auto flat = r.params();
            // Shapes resolved against the named net below.
            const auto net_it = sections.nets.find(pending_name);
            if (net_it == sections.nets.end()) {
                throw MalformedFileError("checkpoint: adam state before its net '" +
                                         pending_name + "'");
            }
            const int half = net_it->second.p.flat_size();
            if (static_cast<int>(flat.size()) != 2 * half) {
                throw MalformedFileError("checkpoint: adam state length mismatch");
            }
            st.first_moment = ParamBlob::zeros_like(net_it->second.p);
            st.second_moment = ParamBlob::zeros_like(net_it->second.p);
            st.first_moment.unflatten_from({flat.data(), static_cast<std::size_t>(half)});
            st.second_moment.unflatten_from(
                {flat.data() + half, static_cast<std::size_t>(half)});
            sections.adams[pending_name] = std::move(st);
        } else if (tok[0] == "adamvec") {
            if (tok.size() != 6) throw MalformedFileError("checkpoint: bad adamvec header");
            AdamVecState st;
            st.step_count = parse_ll_strict(tok[2]);
            st.beta1 = parse_double_strict(tok[3]);
            st.beta2 = parse_double_strict(tok[4]);
            st.epsilon_stab = parse_double_strict(tok[5]);
            const auto flat = r.params();
            if (flat.size() % 2 != 0) {
                throw MalformedFileError("checkpoint: adamvec length must be even");
            }
            const std::size_t half = flat.size() / 2;
            st.first_moment.assign(flat.begin(), flat.begin() + half);
            st.second_moment.assign(flat.begin() + half, flat.end());
            sections.adam_vecs[tok[1]] = std::move(st);
        } else {
            throw MalformedFileError("checkpoint: unknown section '" + tok[0] + "'");
        }
    }

    TrainedAgent out;
    out.algorithm = algorithm;
    if (algorithm == "ddpg") {
        DdpgAgent agent;
        agent.cfg = configs.ddpg;
        agent.actor = require_net(sections, "actor");
        agent.critic = require_net(sections, "critic");
        agent.target_actor = require_net(sections, "target_actor");
        agent.target_critic = require_net(sections, "target_critic");
        agent.actor_opt = adam_or_fresh(sections, "actor", agent.actor);
        agent.critic_opt = adam_or_fresh(sections, "critic", agent.critic);
        out.agent = std::move(agent);
    } else if (algorithm == "ppo") {
        PpoAgent agent;
        agent.cfg = configs.ppo;
        agent.policy.mean = require_net(sections, "policy_mean");
        agent.value = require_net(sections, "value");
        const auto ls = sections.vecs.find("log_std");
        if (ls == sections.vecs.end()) {
            throw MalformedFileError("checkpoint: missing log_std vector");
        }
        agent.policy.log_std = ls->second;
        agent.policy_opt = adam_or_fresh(sections, "policy_mean", agent.policy.mean);
        agent.value_opt = adam_or_fresh(sections, "value", agent.value);
        const auto lso = sections.adam_vecs.find("log_std");
        agent.log_std_opt =
            lso == sections.adam_vecs.end() ? make_adam_vec(agent.policy.log_std.size()) : lso->second;
        out.agent = std::move(agent);
    } else if (algorithm == "trpo") {
        TrpoAgent agent;
        agent.cfg = configs.trpo;
        agent.policy.mean = require_net(sections, "policy_mean");
        agent.value = require_net(sections, "value");
        const auto ls = sections.vecs.find("log_std");
        if (ls == sections.vecs.end()) {
            throw MalformedFileError("checkpoint: missing log_std vector");
        }
        agent.policy.log_std = ls->second;
        agent.value_opt = adam_or_fresh(sections, "value", agent.value);
        out.agent = std::move(agent);
    } else {
        throw MalformedFileError("checkpoint: unknown algorithm '" + algorithm + "'");
    }
    return out;
}

void save_checkpoint(const std::string& path, const TrainedAgent& agent,
                     std::uint64_t env_fingerprint) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot open '" + path + "' for writing");
    out << checkpoint_to_text(agent, env_fingerprint);
    if (!out) throw IoError("checkpoint: write to '" + path + "' failed");
}

TrainedAgent load_checkpoint(const std::string& path, const AlgoConfigs& configs,
                             std::uint64_t expected_env_fingerprint, bool allow_env_mismatch) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return checkpoint_from_text(buf.str(), configs, expected_env_fingerprint, allow_env_mismatch);
}

}  // namespace gait
