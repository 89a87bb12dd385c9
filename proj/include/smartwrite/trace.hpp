#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace smartwrite {

// Synthetic memory access traces. Text format, one op per line:
//   <cycle> R <0xaddress>
//   <cycle> W <0xaddress> <hex payload, 2 chars per byte>
// Cycles increase by a fixed stride, addresses are line-aligned.

enum class Op : uint8_t { READ, WRITE };

enum class Scenario { READ_HEAVY, BALANCED, WRITE_HEAVY };  // R>W, R=W, R<W

const char* scenario_name(Scenario s);           // "R>W" / "R=W" / "R<W"
Scenario scenario_from_name(const std::string&); // throws on unknown name
const char* scenario_slug(Scenario s);           // filename-safe tag

struct Ratio {
    int reads = 1;
    int writes = 1;
};

// Read:write mixes cycled through when building a corpus for one scenario.
const std::vector<Ratio>& scenario_pool(Scenario s);

struct TraceRecord {
    uint64_t cycle = 0;
    Op op = Op::READ;
    uint64_t address = 0;
    std::vector<uint8_t> data;  // payload, WRITE only
};

struct TraceSpec {
    uint64_t n_ops = 100000;
    Ratio ratio;
    uint64_t address_lines = 4096;
    int line_bytes = 64;
    uint64_t cycle_stride = 10;
    uint64_t seed = 0;

    void validate() const;
};

struct Trace {
    std::vector<TraceRecord> records;
    uint64_t n_reads = 0;
    uint64_t n_writes = 0;
};

// Deterministic: identical specs give byte-identical traces. Read count is
// floor(n_ops * reads / (reads + writes)), the remainder writes.
Trace generate_trace(const TraceSpec& spec);

void write_trace(const Trace& t, std::ostream& os);
void write_trace_file(const Trace& t, const std::string& path);

// Throws std::runtime_error naming the 1-based line and offending field.
Trace parse_trace(std::istream& is);
Trace parse_trace_file(const std::string& path);

struct CorpusConfig {
    int traces_per_scenario = 20;
    uint64_t n_ops = 100000;
    uint64_t address_lines = 4096;
    int line_bytes = 64;
    uint64_t cycle_stride = 10;

    void validate() const;
};

struct CorpusEntry {
    Scenario scenario;
    Ratio ratio;
    uint64_t seed = 0;
    Trace trace;
};

// Scenario blocks in order R>W, R=W, R<W; each block cycles its ratio pool.
// Per-trace seeds are derived from `seed` and the trace's slot, so any one
// trace can be regenerated in isolation.
std::vector<CorpusEntry> generate_corpus(const CorpusConfig& cfg, uint64_t seed);
std::vector<CorpusEntry> generate_corpus_serial(const CorpusConfig& cfg, uint64_t seed);

// Persists trace files plus a corpus.json manifest carrying the metadata the
// bare trace format drops (scenario, ratio, seed, address space).
void save_corpus(const std::vector<CorpusEntry>& corpus, const CorpusConfig& cfg,
                 const std::string& dir);
// When cfg_out is non-null it receives the manifest's generation settings.
std::vector<CorpusEntry> load_corpus(const std::string& dir, CorpusConfig* cfg_out = nullptr);

}  // namespace smartwrite
