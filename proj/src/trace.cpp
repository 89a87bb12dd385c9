#include "smartwrite/trace.hpp"

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "smartwrite/rng.hpp"

namespace smartwrite {

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::READ_HEAVY: return "R>W";
        case Scenario::BALANCED: return "R=W";
        case Scenario::WRITE_HEAVY: return "R<W";
    }
    throw std::logic_error("bad scenario");
}

const char* scenario_slug(Scenario s) {
    switch (s) {
        case Scenario::READ_HEAVY: return "read_heavy";
        case Scenario::BALANCED: return "balanced";
        case Scenario::WRITE_HEAVY: return "write_heavy";
    }
    throw std::logic_error("bad scenario");
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "R>W") return Scenario::READ_HEAVY;
    if (name == "R=W") return Scenario::BALANCED;
    if (name == "R<W") return Scenario::WRITE_HEAVY;
    throw std::invalid_argument("scenario: unknown name '" + name + "'");
}

const std::vector<Ratio>& scenario_pool(Scenario s) {
    static const std::vector<Ratio> read_heavy{{9, 1}, {8, 2}, {7, 3}, {6, 4}};
    static const std::vector<Ratio> balanced{{5, 5}};
    static const std::vector<Ratio> write_heavy{{4, 6}, {3, 7}, {2, 8}, {1, 9}};
    switch (s) {
        case Scenario::READ_HEAVY: return read_heavy;
        case Scenario::BALANCED: return balanced;
        case Scenario::WRITE_HEAVY: return write_heavy;
    }
    throw std::logic_error("bad scenario");
}

void TraceSpec::validate() const {
    if (n_ops == 0) throw std::invalid_argument("n_ops: must be > 0");
    if (ratio.reads < 0 || ratio.writes < 0 || ratio.reads + ratio.writes == 0)
        throw std::invalid_argument("ratio: reads/writes must be >= 0 and not both zero");
    if (address_lines == 0) throw std::invalid_argument("address_lines: must be > 0");
    if (line_bytes <= 0) throw std::invalid_argument("line_bytes: must be > 0");
    if (cycle_stride == 0) throw std::invalid_argument("cycle_stride: must be > 0");
}

Trace generate_trace(const TraceSpec& spec) {
    spec.validate();
    uint64_t n_reads = spec.n_ops * static_cast<uint64_t>(spec.ratio.reads) /
                       static_cast<uint64_t>(spec.ratio.reads + spec.ratio.writes);
    uint64_t n_writes = spec.n_ops - n_reads;

    // Draw order is fixed (op layout shuffle, then per-op address/payload) so
    // a given seed always reproduces the same file.
    Rng rng(spec.seed);
    std::vector<uint8_t> is_read(spec.n_ops, 0);
    for (uint64_t i = 0; i < n_reads; ++i) is_read[i] = 1;
    rng.shuffle(is_read);

    Trace t;
    t.n_reads = n_reads;
    t.n_writes = n_writes;
    t.records.resize(spec.n_ops);
    for (uint64_t i = 0; i < spec.n_ops; ++i) {
        TraceRecord& r = t.records[i];
        r.cycle = i * spec.cycle_stride;
        r.address = rng.next_below(spec.address_lines) * static_cast<uint64_t>(spec.line_bytes);
        if (is_read[i]) {
            r.op = Op::READ;
        } else {
            r.op = Op::WRITE;
            r.data.resize(spec.line_bytes);
            for (auto& b : r.data) b = rng.next_byte();
        }
    }
    return t;
}

namespace {

const char kHex[] = "0123456789abcdef";

int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

void write_trace(const Trace& t, std::ostream& os) {
    std::string line;
    char buf[32];
    for (const TraceRecord& r : t.records) {
        line.clear();
        std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(r.cycle));
        line += buf;
        line += r.op == Op::READ ? " R " : " W ";
        std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(r.address));
        line += buf;
        if (r.op == Op::WRITE) {
            line += ' ';
            for (uint8_t b : r.data) {
                line += kHex[b >> 4];
                line += kHex[b & 0xf];
            }
        }
        line += '\n';
        os << line;
    }
}

void write_trace_file(const Trace& t, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_trace(t, os);
}

Trace parse_trace(std::istream& is) {
    Trace t;
    std::string line;
    size_t lineno = 0;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error("trace parse error: line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) fail("empty line");
        std::istringstream ss(line);
        TraceRecord r;
        std::string cycle_tok, op_tok, addr_tok, payload_tok, extra;
        if (!(ss >> cycle_tok)) fail("missing cycle field");
        try {
            size_t pos = 0;
            r.cycle = std::stoull(cycle_tok, &pos);
            if (pos != cycle_tok.size()) throw std::invalid_argument("");
        } catch (...) {
            fail("bad cycle '" + cycle_tok + "'");
        }
        if (!(ss >> op_tok)) fail("missing op field");
        if (op_tok == "R") r.op = Op::READ;
        else if (op_tok == "W") r.op = Op::WRITE;
        else fail("bad op '" + op_tok + "'");
        if (!(ss >> addr_tok)) fail("missing address field");
        if (addr_tok.size() < 3 || addr_tok[0] != '0' || (addr_tok[1] != 'x' && addr_tok[1] != 'X'))
            fail("bad address '" + addr_tok + "' (expected 0x-prefixed hex)");
        r.address = 0;
        for (size_t i = 2; i < addr_tok.size(); ++i) {
            int v = hex_val(addr_tok[i]);
            if (v < 0) fail("bad address '" + addr_tok + "' (expected 0x-prefixed hex)");
            r.address = (r.address << 4) | static_cast<uint64_t>(v);
        }
        if (r.op == Op::WRITE) {
            if (!(ss >> payload_tok)) fail("missing payload field on W op");
            if (payload_tok.size() % 2 != 0) fail("payload has odd hex length");
            r.data.resize(payload_tok.size() / 2);
            for (size_t i = 0; i < r.data.size(); ++i) {
                int hi = hex_val(payload_tok[2 * i]);
                int lo = hex_val(payload_tok[2 * i + 1]);
                if (hi < 0 || lo < 0) fail("bad payload hex");
                r.data[i] = static_cast<uint8_t>((hi << 4) | lo);
            }
            ++t.n_writes;
        } else {
            ++t.n_reads;
        }
        if (ss >> extra) fail("unexpected trailing field '" + extra + "'");
        t.records.push_back(std::move(r));
    }
    return t;
}

Trace parse_trace_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open trace file: " + path);
    return parse_trace(is);
}

void CorpusConfig::validate() const {
    if (traces_per_scenario <= 0) throw std::invalid_argument("traces_per_scenario: must be > 0");
    if (n_ops == 0) throw std::invalid_argument("n_ops: must be > 0");
    if (address_lines == 0) throw std::invalid_argument("address_lines: must be > 0");
    if (line_bytes <= 0) throw std::invalid_argument("line_bytes: must be > 0");
    if (cycle_stride == 0) throw std::invalid_argument("cycle_stride: must be > 0");
}

namespace {

std::vector<CorpusEntry> corpus_slots(const CorpusConfig& cfg, uint64_t seed) {
    cfg.validate();
    std::vector<CorpusEntry> out;
    out.reserve(3 * static_cast<size_t>(cfg.traces_per_scenario));
    for (Scenario s : {Scenario::READ_HEAVY, Scenario::BALANCED, Scenario::WRITE_HEAVY}) {
        const auto& pool = scenario_pool(s);
        for (int i = 0; i < cfg.traces_per_scenario; ++i) {
            CorpusEntry e;
            e.scenario = s;
            e.ratio = pool[static_cast<size_t>(i) % pool.size()];
            e.seed = derive_seed(seed, std::string("trace/") + scenario_slug(s),
                                 static_cast<uint64_t>(i));
            out.push_back(std::move(e));
        }
    }
    return out;
}

TraceSpec spec_for(const CorpusConfig& cfg, const CorpusEntry& e) {
    TraceSpec spec;
    spec.n_ops = cfg.n_ops;
    spec.ratio = e.ratio;
    spec.address_lines = cfg.address_lines;
    spec.line_bytes = cfg.line_bytes;
    spec.cycle_stride = cfg.cycle_stride;
    spec.seed = e.seed;
    return spec;
}

}  // namespace

std::vector<CorpusEntry> generate_corpus_serial(const CorpusConfig& cfg, uint64_t seed) {
    auto slots = corpus_slots(cfg, seed);
    for (auto& e : slots) e.trace = generate_trace(spec_for(cfg, e));
    return slots;
}

std::vector<CorpusEntry> generate_corpus(const CorpusConfig& cfg, uint64_t seed) {
    auto slots = corpus_slots(cfg, seed);
    // Slots are independent (each carries its own derived seed), so the
    // parallel fill is bit-identical to the serial one.
    int n = static_cast<int>(slots.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) slots[i].trace = generate_trace(spec_for(cfg, slots[i]));
    return slots;
}

void save_corpus(const std::vector<CorpusEntry>& corpus, const CorpusConfig& cfg,
                 const std::string& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["n_ops"] = cfg.n_ops;
    manifest["address_lines"] = cfg.address_lines;
    manifest["line_bytes"] = cfg.line_bytes;
    manifest["cycle_stride"] = cfg.cycle_stride;
    manifest["traces_per_scenario"] = cfg.traces_per_scenario;
    auto& files = manifest["traces"] = nlohmann::json::array();
    std::vector<int> counter(3, 0);
    for (const auto& e : corpus) {
        int idx = counter[static_cast<int>(e.scenario)]++;
        char name[64];
        std::snprintf(name, sizeof name, "%s_%02d.trace", scenario_slug(e.scenario), idx);
        write_trace_file(e.trace, dir + "/" + name);
        files.push_back({{"file", name},
                         {"scenario", scenario_name(e.scenario)},
                         {"reads", e.ratio.reads},
                         {"writes", e.ratio.writes},
                         {"seed", e.seed}});
    }
    std::ofstream os(dir + "/corpus.json", std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + dir + "/corpus.json");
    os << manifest.dump(2) << '\n';
}

std::vector<CorpusEntry> load_corpus(const std::string& dir, CorpusConfig* cfg_out) {
    std::ifstream is(dir + "/corpus.json", std::ios::binary);
    if (!is) throw std::runtime_error("missing corpus manifest: " + dir + "/corpus.json");
    nlohmann::json manifest = nlohmann::json::parse(is);
    if (cfg_out) {
        cfg_out->traces_per_scenario = manifest.at("traces_per_scenario").get<int>();
        cfg_out->n_ops = manifest.at("n_ops").get<uint64_t>();
        cfg_out->address_lines = manifest.at("address_lines").get<uint64_t>();
        cfg_out->line_bytes = manifest.at("line_bytes").get<int>();
        cfg_out->cycle_stride = manifest.at("cycle_stride").get<uint64_t>();
    }
    std::vector<CorpusEntry> out;
    for (const auto& j : manifest.at("traces")) {
        CorpusEntry e;
        e.scenario = scenario_from_name(j.at("scenario").get<std::string>());
        e.ratio.reads = j.at("reads").get<int>();
        e.ratio.writes = j.at("writes").get<int>();
        e.seed = j.at("seed").get<uint64_t>();
        e.trace = parse_trace_file(dir + "/" + j.at("file").get<std::string>());
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace smartwrite
