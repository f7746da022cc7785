// secg: command-line front end.
//
//   secg build-dict  [dictionary flags] [--dict-dump FILE]
//   secg compress    INPUT -o OUT.secg [run flags]
//   secg decompress  IN.secg -o OUT [--csv]
//   secg metrics     ORIGINAL (IN.secg | RECONSTRUCTION)
//   secg benchmark   DIR [run flags] [--jobs N] [--sweep] [-o CSV]
//   secg profile     INPUT [run flags] [-o CSV]
//
// Exit codes: 0 ok, 1 other failure, 2 configuration, 3 ingestion, 4 corrupt
// container. Flag spelling, CSV schemas and config keys are in docs/formats.md.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "secg/secg.hpp"

namespace fs = std::filesystem;
using namespace secg;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kIngest = 3, kCorrupt = 4 };

// Parameter rows of the (delta, prd0) sweep.
constexpr std::pair<double, double> kSweep[] = {
    {60, 0.75},  {60, 0.74},  {40, 0.645}, {30, 0.435}, {16, 0.275}, {100, 0.94}, {100, 0.93}, {100, 0.90},
    {80, 0.85},  {80, 0.805}, {150, 1.66}, {120, 1.43}, {110, 1.22}, {110, 1.07}, {110, 1.02},
};

struct Options {
  std::optional<std::string> family;
  std::optional<std::size_t> n_b;
  std::optional<int> l, j_min, j_max;
  std::optional<std::size_t> m_dct;
  bool basis = false;
  std::optional<double> prd0, delta, target_prd;
  bool no_huffman = false;
  std::optional<std::size_t> k_max;
  std::optional<unsigned> bits;
  std::string config_file;
  std::string format = "mitdb212";
};

void add_dictionary_flags(CLI::App* c, Options& o) {
  c->add_option("--family", o.family, "wavelet family: cw4, cw2, cdf97, cdf53, db4, coif, sym, short3");
  c->add_option("--nb", o.n_b, "segment length n_b");
  c->add_option("--l", o.l, "translation refinement exponent (0 gives a basis)");
  c->add_option("--jmin", o.j_min, "coarsest scale");
  c->add_option("--jmax", o.j_max, "finest scale");
  c->add_option("--mdct", o.m_dct, "number of DCT atoms");
  c->add_flag("--basis", o.basis, "start from the basis defaults (l = 0, scales 3..8)");
  c->add_option("--config", o.config_file, "JSON run configuration; flags override it");
}

void add_run_flags(CLI::App* c, Options& o) {
  add_dictionary_flags(c, o);
  c->add_option("--prd0", o.prd0, "per-segment PRD target of the pursuit");
  c->add_option("--delta", o.delta, "quantization step");
  c->add_option("--target-prd", o.target_prd, "tune prd0 so the final PRD approaches this value");
  c->add_flag("--no-huffman", o.no_huffman, "fixed-width streams instead of Huffman coding");
  c->add_option("--kmax", o.k_max, "atom budget per segment (default n_b/2)");
  c->add_option("--bits", o.bits, "bits per original sample in CR (default 11)");
  c->add_option("--format", o.format, "input format: mitdb212, raw_i16, csv")->check(CLI::IsMember({"mitdb212", "raw_i16", "csv", "212", "i16"}));
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

/// Config file first, then explicit flags, then validation.
RunConfig make_config(const Options& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_file.empty()) j = read_json(o.config_file);
  static const std::vector<std::string> known{"family", "n_b", "l", "j_min", "j_max", "m_dct", "basis",
                                              "border_norm_floor", "dedup_tol", "cascade_levels", "prd0", "delta",
                                              "huffman", "k_max", "jobs", "bits_per_sample"};
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");

  RunConfig c;
  try {
    const auto family = parse_family(o.family.value_or(j.value("family", std::string("cdf97"))));
    const bool basis = o.basis || j.value("basis", false);
    const std::size_t n_b = o.n_b.value_or(j.value("n_b", std::size_t{500}));
    c.dictionary = basis ? DictionaryConfig::basis(family, n_b) : DictionaryConfig::dictionary(family, n_b);
    auto& d = c.dictionary;
    d.translation_exponent = o.l.value_or(j.value("l", d.translation_exponent));
    d.j_min = o.j_min.value_or(j.value("j_min", d.j_min));
    d.j_max = o.j_max.value_or(j.value("j_max", d.j_max));
    d.m_dct = o.m_dct.value_or(j.value("m_dct", d.m_dct));
    d.border_norm_floor = j.value("border_norm_floor", d.border_norm_floor);
    d.dedup_tol = j.value("dedup_tol", d.dedup_tol);
    d.cascade_levels = j.value("cascade_levels", d.cascade_levels);
    c.prd0 = o.prd0.value_or(j.value("prd0", c.prd0));
    c.delta = o.delta.value_or(j.value("delta", c.delta));
    c.huffman = o.no_huffman ? false : j.value("huffman", c.huffman);
    c.k_max = o.k_max.value_or(j.value("k_max", c.k_max));
    c.jobs = j.value("jobs", c.jobs);
    c.bits_per_sample = o.bits.value_or(j.value("bits_per_sample", c.bits_per_sample));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
  if (o.target_prd && !(*o.target_prd > 0.0)) throw ConfigError("--target-prd must be > 0");
  c.validate();
  return c;
}

/// Writes through a temporary file in the target directory, then renames, so
/// a failure never leaves a partial output behind.
void write_atomic(const fs::path& out, const std::string& data) {
  const fs::path tmp = out.string() + ".tmp" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count());
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error("cannot write '" + out.string() + "'");
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw Error("write failed for '" + out.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, out, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename into '" + out.string() + "': " + ec.message());
  }
}

void emit(const std::string& out, const std::string& data) {
  if (out.empty() || out == "-")
    std::cout << data;
  else
    write_atomic(out, data);
}

std::vector<std::uint8_t> read_container_bytes(const fs::path& p) {
  try {
    return read_file_bytes(p);
  } catch (const IngestionError& e) {
    throw IngestionError(std::string("container: ") + e.what(), e.offset());
  }
}

bool has_container_magic(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  char m[4] = {};
  return in.read(m, 4) && std::string(m, 4) == "SECG";
}

struct Compressed {
  CompressionResult result;
  double prd0 = 0.0;
};

Compressed run(const Record& rec, const Dictionary& dict, const RunConfig& cfg, const std::optional<double>& target) {
  if (target) {
    const auto t0 = std::chrono::steady_clock::now();
    auto tuned = tune_prd0(rec.samples, dict, cfg, *target);
    tuned.result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(tuned.result), tuned.prd0};
  }
  return {compress_samples(rec.samples, dict, cfg), cfg.prd0};
}

std::string summary_line(const MetricsReport& m, double seconds) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "PRD=%.10g PRDN=%.10g SR=%.6g CR=%.6g CR^Hf=%.6g QS=%.6g time=%.3fs\n", m.prd, m.prdn,
                m.sr, m.cr, m.cr_hf, m.qs, seconds);
  return buf;
}

// ---------------------------------------------------------------- verbs

int cmd_build_dict(const Options& o, const std::string& dump) {
  const RunConfig c = make_config(o);
  const Dictionary d = build_dictionary(c.dictionary);
  if (!dump.empty()) {
    const auto bytes = dictionary_dump(d);
    write_atomic(dump, std::string(bytes.begin(), bytes.end()));
  }
  std::size_t counts[3] = {};
  for (const auto& p : d.provenance()) ++counts[static_cast<int>(p.kind)];
  std::printf("family=%s n_b=%zu l=%d j=%d..%d atoms=%zu (dct %zu, scaling %zu, wavelet %zu) redundancy=%.3f id=%016llx\n",
              std::string(family_name(c.dictionary.family)).c_str(), d.n_b(), c.dictionary.translation_exponent,
              c.dictionary.j_min, c.dictionary.j_max, d.size(), counts[0], counts[1], counts[2], d.redundancy(),
              static_cast<unsigned long long>(d.id()));
  return kOk;
}

int cmd_compress(const Options& o, const std::string& input, const std::string& output) {
  const RunConfig c = make_config(o);
  const auto fmt = parse_record_format(o.format);
  if (output.empty()) throw ConfigError("compress needs -o OUTPUT");
  const Record rec = read_record(input, fmt);
  const Dictionary dict = build_dictionary(c.dictionary);
  const auto r = run(rec, dict, c, o.target_prd);
  const auto bytes = r.result.container.to_bytes();
  write_atomic(output, std::string(bytes.begin(), bytes.end()));
  if (o.target_prd) std::printf("prd0=%.6g\n", r.prd0);
  std::cout << summary_line(r.result.report, r.result.seconds);
  return kOk;
}

int cmd_decompress(const std::string& input, const std::string& output, bool csv) {
  if (output.empty()) throw ConfigError("decompress needs -o OUTPUT");
  const auto model = decode(EncodedContainer::from_bytes(read_container_bytes(input)));
  const Dictionary dict = build_dictionary(model.dictionary);
  auto x = dequantize_reconstruct(model, dict);
  x.resize(model.sample_count);
  std::string data;
  if (csv) {
    std::ostringstream s;
    s << std::setprecision(17);
    for (double v : x) s << v << '\n';
    data = s.str();
  } else {
    data.resize(2 * x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto v = static_cast<std::int16_t>(std::clamp(std::lround(x[i]), -32768L, 32767L));
      data[2 * i] = static_cast<char>(v & 0xFF);
      data[2 * i + 1] = static_cast<char>((static_cast<std::uint16_t>(v) >> 8) & 0xFF);
    }
  }
  write_atomic(output, data);
  return kOk;
}

int cmd_metrics(const Options& o, const std::string& original, const std::string& other, const std::string& recon_format) {
  const auto fmt = parse_record_format(o.format);
  const auto rfmt = parse_record_format(recon_format);
  const unsigned bits = o.bits.value_or(11);
  if (bits < 1 || bits > 32) throw ConfigError("--bits must be in [1, 32]");
  const Record rec = read_record(original, fmt);
  if (!fs::exists(other)) throw IngestionError("cannot open '" + other + "'", 0);
  nlohmann::json j;
  if (has_container_magic(other)) {
    const auto model = decode(EncodedContainer::from_bytes(read_container_bytes(other)));
    if (model.sample_count != rec.size())
      throw DimensionError("container holds " + std::to_string(model.sample_count) + " samples, record has " +
                           std::to_string(rec.size()));
    const Dictionary dict = build_dictionary(model.dictionary);
    auto x = dequantize_reconstruct(model, dict);
    x.resize(model.sample_count);
    const auto m = evaluate(rec.samples, x, model, bits);
    j = {{"prd", m.prd}, {"prdn", m.prdn}, {"sr", m.sr}, {"cr", m.cr}, {"cr_hf", m.cr_hf}, {"qs", m.qs},
         {"terms", m.total_terms}, {"bytes", m.bytes}, {"bytes_hf", m.bytes_hf}, {"samples", rec.size()}};
  } else {
    const Record r = read_record(other, rfmt);
    j = {{"prd", prd(rec.samples, r.samples)}, {"prdn", prdn(rec.samples, r.samples)}, {"samples", rec.size()}};
  }
  std::cout << std::setprecision(17) << j.dump() << '\n';
  return kOk;
}

std::vector<fs::path> discover_records(const fs::path& dir, RecordFormat fmt) {
  if (!fs::is_directory(dir)) throw IngestionError("not a directory: '" + dir.string() + "'", 0);
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    if ((fmt == RecordFormat::mitdb212 && ext == ".hea") || (fmt == RecordFormat::csv && ext == ".csv") ||
        (fmt == RecordFormat::raw_i16 && (ext == ".i16" || ext == ".raw")))
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_benchmark(const Options& o, const std::string& dir, unsigned jobs, bool sweep, const std::string& output,
                  bool table) {
  const RunConfig c = make_config(o);
  const auto fmt = parse_record_format(o.format);
  if (jobs < 1) throw ConfigError("--jobs must be >= 1");
  if (sweep && o.target_prd) throw ConfigError("--sweep and --target-prd are exclusive");
  const auto paths = discover_records(dir, fmt);
  const Dictionary dict = build_dictionary(c.dictionary);

  std::vector<std::pair<double, double>> grid;
  if (sweep)
    grid.assign(std::begin(kSweep), std::end(kSweep));
  else
    grid.push_back({c.delta, c.prd0});

  // rows[g][record]; empty optional for unreadable records.
  std::vector<std::vector<std::optional<BenchmarkRow>>> rows(grid.size(),
                                                             std::vector<std::optional<BenchmarkRow>>(paths.size()));
  std::vector<char> readable(paths.size(), 1);
  std::mutex log;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < paths.size();) {
      Record rec;
      try {
        rec = read_record(paths[i], fmt);
      } catch (const Error& e) {
        std::lock_guard lk(log);
        std::cerr << "warning: skipping " << paths[i].filename().string() << ": " << e.what() << '\n';
        readable[i] = 0;
        continue;
      }
      const std::string name = paths[i].stem().string();
      try {
        if (sweep) {
          // The pursuit is rerun only when prd0 changes; delta only affects quantization.
          RunConfig rc = c;
          rc.jobs = 1;
          std::optional<double> done_prd0;
          std::vector<SegmentApproximation> approxs;
          double pursuit_seconds = 0.0;
          for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto t0 = std::chrono::steady_clock::now();
            rc.delta = grid[g].first;
            rc.prd0 = grid[g].second;
            rc.validate();
            if (done_prd0 != rc.prd0) {
              approxs = approximate_samples(rec.samples, dict, rc);
              done_prd0 = rc.prd0;
              pursuit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }
            const auto r = finish_compression(rec.samples, dict, approxs, rc.delta, rc);
            const double secs =
                pursuit_seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rows[g][i] = BenchmarkRow::from(name, r.report, rc.prd0, rc.delta, secs);
          }
        } else {
          RunConfig rc = c;
          rc.jobs = 1;
          const auto r = run(rec, dict, rc, o.target_prd);
          rows[0][i] = BenchmarkRow::from(name, r.result.report, r.prd0, rc.delta, r.result.seconds);
        }
      } catch (const Error& e) {
        std::lock_guard lk(log);
        std::cerr << "warning: skipping " << name << ": " << e.what() << '\n';
        readable[i] = 0;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(paths.size(), 1)));
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (std::count(readable.begin(), readable.end(), 1) == 0 || paths.empty())
    throw IngestionError("no records processed in '" + dir + "'", 0);

  std::ostringstream csv, tab;
  csv << kBenchmarkCsvHeader << '\n';
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<BenchmarkRow> ok;
    for (std::size_t i = 0; i < paths.size(); ++i)
      if (readable[i] && rows[g][i]) ok.push_back(*rows[g][i]);
    for (const auto& r : ok) write_csv_row(csv, r);
    const auto [m, s] = summarize(ok);
    write_csv_row(csv, m);
    write_csv_row(csv, s);
    if (table) {
      if (sweep) tab << "delta=" << grid[g].first << " prd0=" << grid[g].second << '\n';
      write_table(tab, ok);
      tab << '\n';
    }
  }
  emit(output, csv.str());
  if (table) std::cerr << tab.str();
  return kOk;
}

int cmd_profile(const Options& o, const std::string& input, const std::string& output, double sigmas) {
  const RunConfig c = make_config(o);
  const auto fmt = parse_record_format(o.format);
  if (!(sigmas > 0.0)) throw ConfigError("--sigmas must be > 0");
  const Record rec = read_record(input, fmt);
  const Dictionary dict = build_dictionary(c.dictionary);
  const auto r = run(rec, dict, c, o.target_prd);
  const auto p = sparsity_profile(r.result.model, sigmas);
  std::vector<char> flag(p.inverse_sr.size(), 0);
  for (auto q : p.flagged) flag[q] = 1;
  std::ostringstream s;
  s << std::setprecision(10) << "q,inv_sr,prd_q,flagged\n";
  for (std::size_t q = 0; q < p.inverse_sr.size(); ++q)
    s << q << ',' << p.inverse_sr[q] << ',' << r.result.report.prd_q[q] << ',' << int(flag[q]) << '\n';
  emit(output, s.str());
  std::fprintf(stderr, "argmax=%zu mean=%.6g std=%.6g threshold=%.6g flagged=%zu regions=%zu", p.argmax, p.mean,
               p.stddev, p.threshold, p.flagged.size(), p.regions.size());
  for (const auto& [a, b] : p.regions) std::fprintf(stderr, " [%zu,%zu]", a, b);
  std::fprintf(stderr, "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse ECG compression with redundant wavelet dictionaries"};
  app.require_subcommand(1);
  Options o;
  std::string input, output, other, dump, recon_format = "csv";
  bool csv = false, sweep = false, table = false;
  unsigned jobs = 1;
  double sigmas = 4.0;

  auto* bd = app.add_subcommand("build-dict", "build a dictionary and print its summary");
  add_dictionary_flags(bd, o);
  bd->add_option("--dict-dump", dump, "write the binary dictionary dump here");

  auto* cp = app.add_subcommand("compress", "compress one record into a .secg container");
  cp->add_option("input", input, "record (.hea/.dat/base name, .i16 or .csv)")->required();
  cp->add_option("-o,--output", output, "output .secg file")->required();
  add_run_flags(cp, o);

  auto* dc = app.add_subcommand("decompress", "reconstruct samples from a .secg container");
  dc->add_option("input", input, ".secg file")->required();
  dc->add_option("-o,--output", output, "output samples (raw int16 unless --csv)")->required();
  dc->add_flag("--csv", csv, "write one sample per line at full precision");

  auto* me = app.add_subcommand("metrics", "PRD/PRDN (and SR/CR for a container) against the original record");
  me->add_option("original", input, "original record")->required();
  me->add_option("other", other, ".secg container or reconstructed record")->required();
  me->add_option("--format", o.format, "format of the original record");
  me->add_option("--recon-format", recon_format, "format of a reconstructed record (default csv)");
  me->add_option("--bits", o.bits, "bits per original sample in CR (default 11)");

  auto* bm = app.add_subcommand("benchmark", "compress every record in a directory; CSV with mean/std rows");
  bm->add_option("dir", input, "directory of records")->required();
  bm->add_option("-o,--output", output, "CSV output (default stdout)");
  bm->add_option("--jobs", jobs, "records processed concurrently")->check(CLI::PositiveNumber);
  bm->add_flag("--sweep", sweep, "run the 15 (delta, prd0) parameter rows");
  bm->add_flag("--table", table, "also print aligned tables to stderr");
  add_run_flags(bm, o);

  auto* pf = app.add_subcommand("profile", "per-segment inverse sparsity and local PRD");
  pf->add_option("input", input, "record")->required();
  pf->add_option("-o,--output", output, "CSV output (default stdout)");
  pf->add_option("--sigmas", sigmas, "flag threshold in standard deviations above the mean");
  add_run_flags(pf, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (bd->parsed()) return cmd_build_dict(o, dump);
    if (cp->parsed()) return cmd_compress(o, input, output);
    if (dc->parsed()) return cmd_decompress(input, output, csv);
    if (me->parsed()) return cmd_metrics(o, input, other, recon_format);
    if (bm->parsed()) return cmd_benchmark(o, input, jobs, sweep, output, table);
    if (pf->parsed()) return cmd_profile(o, input, output, sigmas);
  } catch (const ConfigError& e) {
    std::cerr << "secg: configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const IngestionError& e) {
    std::cerr << "secg: input error: " << e.what() << '\n';
    return kIngest;
  } catch (const CorruptError& e) {
    std::cerr << "secg: corrupt container: " << e.what() << '\n';
    return kCorrupt;
  } catch (const std::exception& e) {
    std::cerr << "secg: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
