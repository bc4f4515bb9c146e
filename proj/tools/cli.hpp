#pragma once

// Command implementations behind the `olabuf` executable. Kept in a header
// so the test suite can drive them in-process and check exit codes.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "olabuf/baselines.hpp"
#include "olabuf/error.hpp"
#include "olabuf/ola.hpp"
#include "olabuf/persist.hpp"
#include "olabuf/random.hpp"
#include "olabuf/storage.hpp"

namespace olabuf::cli {

enum ExitCode : int { ok = 0, param = 2, io = 3, bounds = 4 };

/// Either the synthetic sine array or a raw array file.
struct ArraySource {
  bool virtual_sin = false;
  index_t n = 0;
  std::string path;

  void add_options(CLI::App &cmd, bool with_n) {
    cmd.add_flag("--virtual-sin", virtual_sin, "use the synthetic array a_i = sin(i)");
    if (with_n) {
      cmd.add_option("--n", n, "length of the synthetic array");
    }
    cmd.add_option("--array", path, "raw little-endian f64 array file");
  }

  void validate() const {
    if (virtual_sin == !path.empty()) {
      throw parameter_error("give exactly one of --virtual-sin or --array");
    }
  }
};

namespace detail {

using clock = std::chrono::steady_clock;

inline std::int64_t elapsed_ns(clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count();
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

template <class F>
decltype(auto) with_array(const ArraySource &src, index_t n_default, F &&fn) {
  src.validate();
  if (src.virtual_sin) {
    const index_t n = src.n > 0 ? src.n : n_default;
    if (n <= 0) {
      throw parameter_error("--n must be positive");
    }
    VirtualSineArray a(n);
    return fn(a);
  }
  FileArray a(src.path);
  return fn(a);
}

} // namespace detail

struct BuildArgs {
  ArraySource source;
  index_t bin_size = 16;
  int moments = 4;
  std::string out;
};

inline int cmd_build(const BuildArgs &args, std::ostream &out) {
  return detail::with_array(args.source, 0, [&](auto &a) {
    CountingArray counted(a);
    const auto t0 = detail::clock::now();
    const OlaBuffer buf = compute_buffer(counted, args.bin_size, args.moments);
    const auto ns = detail::elapsed_ns(t0);
    write_ola_buffer(args.out, buf);
    out << "components=" << buf.components().size() << " beta=" << buf.beta()
        << " external_reads=" << counted.reads() << " writes=" << buf.components().size()
        << " elapsed_ns=" << ns << "\n";
    return ok;
  });
}

struct QueryArgs {
  std::string buffer;
  ArraySource source;
  std::vector<index_t> range;
  std::vector<double> poly{1.0};
};

inline int cmd_query(const QueryArgs &args, std::ostream &out) {
  const OlaBuffer buf = read_ola_buffer(args.buffer);
  if (args.range.size() != 2) {
    throw parameter_error("--range takes two indices p q");
  }
  const RangePolynomial f(args.range[0], args.range[1], args.poly);
  return detail::with_array(args.source, buf.size(), [&](auto &a) {
    CountingArray counted(a);
    const double v = ola_query(counted, buf, f);
    out << "value=" << detail::fmt(v) << " external_reads=" << counted.reads() << "\n";
    return ok;
  });
}

struct UpdateArgs {
  std::string buffer;
  index_t index = -1;
  double delta = 0.0;
  std::string array;
};

/// Applies a_j += Δ to the buffer file, and to the array file if one is given.
inline int cmd_update(const UpdateArgs &args, std::ostream &out) {
  OlaBuffer buf = read_ola_buffer(args.buffer);
  std::optional<FileArray> a;
  if (!args.array.empty()) {
    a.emplace(args.array, FileArray::Mode::read_write);
    if (a->size() != buf.size()) {
      throw parameter_error("array length does not match buffer");
    }
  }
  OlaUpdateStats stats;
  ola_update(buf, args.index, args.delta, &stats);
  if (a) {
    a->set(args.index, a->get(args.index) + args.delta);
  }
  write_ola_buffer(args.buffer, buf);
  out << "cells_modified=" << stats.cells_modified << "\n";
  return ok;
}

struct BenchArgs {
  std::string mode = "query";
  index_t n = index_t{1} << 20;
  std::vector<index_t> bin_sizes{128};
  std::vector<int> moments{4};
  int trials = 100;
  std::uint64_t seed = 1;
  /// Endpoint position inside its bin for approx mode; negative means b/2.
  index_t edge_offset = -1;
  bool no_timing = false;
};

inline constexpr const char *bench_header =
    "mode,n,b,N,trial,external_reads,buffer_reads,cells_modified,wall_ns,bins_per_endpoint,"
    "error_fraction";

namespace detail {

struct BenchRow {
  std::string mode;
  index_t n = 0;
  index_t b = 0;
  int moments = 0;
  int trial = 0;
  std::uint64_t external_reads = 0;
  std::uint64_t buffer_reads = 0;
  std::uint64_t cells_modified = 0;
  std::int64_t wall_ns = 0;
  std::optional<int> bins{};
  std::optional<double> error_fraction{};
};

inline void emit(std::ostream &out, const BenchRow &r, bool no_timing) {
  out << r.mode << ',' << r.n << ',' << r.b << ',' << r.moments << ',' << r.trial << ','
      << r.external_reads << ',' << r.buffer_reads << ',' << r.cells_modified << ','
      << (no_timing ? 0 : r.wall_ns) << ',';
  if (r.bins) {
    out << *r.bins;
  }
  out << ',';
  if (r.error_fraction) {
    out << std::setprecision(6) << *r.error_fraction;
  }
  out << '\n';
}

} // namespace detail

inline int cmd_bench(const BenchArgs &args, std::ostream &out) {
  static const std::vector<std::string> modes{"construction", "query", "update", "approx",
                                              "baseline"};
  if (std::find(modes.begin(), modes.end(), args.mode) == modes.end()) {
    throw parameter_error("unknown bench mode '" + args.mode + "'");
  }
  if (args.trials < 0 || args.n < 2) {
    throw parameter_error("--trials must be >= 0 and --n >= 2");
  }
  out << bench_header << '\n';
  if (args.trials == 0) {
    return ok;
  }
  VirtualSineArray base(args.n);
  SplitMix64 rng(args.seed);
  for (index_t b : args.bin_sizes) {
    for (int moments : args.moments) {
      detail::BenchRow row{args.mode, args.n, b, moments, 0};
      if (args.mode == "construction") {
        for (int t = 0; t < args.trials; ++t) {
          CountingArray a(base);
          const auto t0 = detail::clock::now();
          const OlaBuffer buf = compute_buffer(a, b, moments);
          row.wall_ns = detail::elapsed_ns(t0);
          row.trial = t;
          row.external_reads = a.reads();
          row.cells_modified = buf.components().size();
          detail::emit(out, row, args.no_timing);
        }
        continue;
      }
      OlaBuffer buf = compute_buffer(base, b, moments);
      CountingArray a(base);
      std::optional<PrefixSumBuffer> ps;
      std::optional<RelativePrefixSumBuffer> rps;
      if (args.mode == "baseline") {
        ps = ps_build(base);
        rps = rps_build(base);
      }
      for (int t = 0; t < args.trials; ++t) {
        row.trial = t;
        a.reset();
        if (args.mode == "query") {
          const auto [p, q] = sample_range(rng, args.n);
          OlaQueryStats stats;
          const auto t0 = detail::clock::now();
          (void)ola_query(a, buf, RangePolynomial::range_sum(p, q), &stats);
          row.wall_ns = detail::elapsed_ns(t0);
          row.external_reads = a.reads();
          row.buffer_reads = stats.buffer_reads;
          detail::emit(out, row, args.no_timing);
        } else if (args.mode == "update") {
          const index_t j = rng.between(0, args.n - 1);
          const double d = rng.uniform(-1.0, 1.0);
          OlaUpdateStats stats;
          const auto t0 = detail::clock::now();
          ola_update(buf, j, d, &stats);
          row.wall_ns = detail::elapsed_ns(t0);
          row.buffer_reads = stats.cells_modified;
          row.cells_modified = stats.cells_modified;
          detail::emit(out, row, args.no_timing);
        } else if (args.mode == "approx") {
          const index_t off = args.edge_offset < 0 ? b / 2 : args.edge_offset;
          if (off >= b) {
            throw parameter_error("--edge-offset must be smaller than the bin size");
          }
          const auto [p0, q0] = sample_range(rng, args.n);
          const index_t p = std::min(p0 / b * b + off, args.n - 1);
          const index_t q = std::clamp(q0 / b * b + off - 1, p, args.n - 1);
          const RangePolynomial f = RangePolynomial::range_sum(p, q);
          const auto profile = error_mass_profile(buf.table(), f);
          const double total = ErrorMassProfile::total(profile.lower) +
                               ErrorMassProfile::total(profile.upper);
          for (int w = 0; w <= moments - 1; ++w) {
            a.reset();
            const auto t0 = detail::clock::now();
            const ApproxResult r = approx_query(a, buf, f, w);
            row.wall_ns = detail::elapsed_ns(t0);
            row.external_reads = r.external_reads;
            row.bins = w;
            const double kept =
                ErrorMassProfile::centered_fraction(profile.lower, profile.lower_window, w) *
                    ErrorMassProfile::total(profile.lower) +
                ErrorMassProfile::centered_fraction(profile.upper, profile.upper_window, w) *
                    ErrorMassProfile::total(profile.upper);
            row.error_fraction = total == 0.0 ? 1.0 : kept / total;
            detail::emit(out, row, args.no_timing);
          }
        } else {
          const auto [p, q] = sample_range(rng, args.n);
          for (const char *which : {"ps", "rps"}) {
            BaselineStats bs;
            const auto t0 = detail::clock::now();
            if (which[0] == 'p') {
              (void)ps_query(*ps, p, q, &bs);
            } else {
              (void)rps_query(*rps, p, q, &bs);
            }
            detail::BenchRow br = row;
            br.mode = which;
            br.wall_ns = detail::elapsed_ns(t0);
            br.buffer_reads = bs.buffer_reads;
            detail::emit(out, br, args.no_timing);
          }
          OlaQueryStats stats;
          const auto t0 = detail::clock::now();
          (void)ola_query(a, buf, RangePolynomial::range_sum(p, q), &stats);
          detail::BenchRow orow = row;
          orow.mode = "ola";
          orow.wall_ns = detail::elapsed_ns(t0);
          orow.external_reads = a.reads();
          orow.buffer_reads = stats.buffer_reads;
          detail::emit(out, orow, args.no_timing);
        }
      }
    }
  }
  return ok;
}

/// Parses argv and dispatches. Returns the process exit code.
inline int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Overlapped bin buffer tool"};
  app.require_subcommand(1);

  BuildArgs build;
  auto *build_cmd = app.add_subcommand("build", "compute a buffer and write it to a file");
  build.source.add_options(*build_cmd, true);
  build_cmd->add_option("--bin-size", build.bin_size)->required();
  build_cmd->add_option("--moments", build.moments)->required();
  build_cmd->add_option("--out", build.out)->required();

  QueryArgs query;
  auto *query_cmd = app.add_subcommand("query", "evaluate sum f(i) a_i");
  query_cmd->add_option("buffer", query.buffer)->required();
  query.source.add_options(*query_cmd, false);
  query_cmd->add_option("--range", query.range)->expected(2)->required();
  query_cmd->add_option("--poly", query.poly, "coefficients of (i-p)^k")->delimiter(',');

  UpdateArgs update;
  auto *update_cmd = app.add_subcommand("update", "apply a_j += delta to a buffer file");
  update_cmd->add_option("buffer", update.buffer)->required();
  update_cmd->add_option("--index", update.index)->required();
  update_cmd->add_option("--delta", update.delta)->required();
  update_cmd->add_option("--array", update.array, "array file updated alongside");

  BenchArgs bench;
  auto *bench_cmd = app.add_subcommand("bench", "benchmark sweep, CSV on stdout");
  bench_cmd->add_option("--mode", bench.mode);
  bench_cmd->add_option("--n", bench.n);
  bench_cmd->add_option("--bin-size", bench.bin_sizes)->delimiter(',');
  bench_cmd->add_option("--moments", bench.moments)->delimiter(',');
  bench_cmd->add_option("--trials", bench.trials);
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->add_option("--edge-offset", bench.edge_offset);
  bench_cmd->add_flag("--no-timing", bench.no_timing, "print 0 in the wall_ns column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : param;
  }

  try {
    if (*build_cmd) {
      return cmd_build(build, out);
    }
    if (*query_cmd) {
      return cmd_query(query, out);
    }
    if (*update_cmd) {
      return cmd_update(update, out);
    }
    return cmd_bench(bench, out);
  } catch (const parameter_error &e) {
    err << "error: " << e.what() << "\n";
    return param;
  } catch (const unsupported_error &e) {
    err << "error: " << e.what() << "\n";
    return param;
  } catch (const io_error &e) {
    err << "I/O error: " << e.what() << "\n";
    return io;
  } catch (const bounds_error &e) {
    err << "out of bounds: " << e.what() << "\n";
    return bounds;
  }
}

} // namespace olabuf::cli
