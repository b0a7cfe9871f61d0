#include "patternmark/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "patternmark/errors.hpp"

namespace patternmark {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  return out;
}

std::uint64_t parse_u64(std::string_view text, const std::string& what,
                        std::size_t line_number) {
  std::uint64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw InputError("line " + std::to_string(line_number) + ": malformed " +
                     what + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

void write_partition(std::ostream& out, const VocabPartition& partition) {
  out << "patternmark-partition v1 N=" << partition.vocab_size()
      << " l=" << partition.key_count() << " digest=" << partition.digest()
      << "\n";
  for (TokenId t = 0; t < partition.vocab_size(); ++t) {
    out << t << '\t' << partition.key_of(t) << "\n";
  }
}

void write_partition_file(const std::string& path,
                          const VocabPartition& partition) {
  std::ofstream out = open_output(path);
  write_partition(out, partition);
  if (!out) throw InputError("failed writing partition to " + path);
}

VocabPartition read_partition(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) {
    throw InputError("line 1: missing partition header");
  }
  std::istringstream hs(header);
  std::string magic, version, n_field, l_field, digest_field;
  hs >> magic >> version >> n_field >> l_field >> digest_field;
  if (magic != "patternmark-partition" || version != "v1" ||
      n_field.rfind("N=", 0) != 0 || l_field.rfind("l=", 0) != 0 ||
      digest_field.rfind("digest=", 0) != 0) {
    throw InputError("line 1: malformed partition header");
  }
  const std::uint64_t vocab_size = parse_u64(n_field.substr(2), "N", 1);
  const std::uint64_t key_count = parse_u64(l_field.substr(2), "l", 1);
  const std::string digest = digest_field.substr(7);

  std::vector<KeyIndex> assignment(vocab_size);
  std::string line;
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    const std::size_t line_number = i + 2;
    if (!std::getline(in, line)) {
      throw InputError("line " + std::to_string(line_number) +
                       ": truncated partition body");
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw InputError("line " + std::to_string(line_number) +
                       ": expected token_id<TAB>key_index");
    }
    const std::uint64_t token =
        parse_u64(std::string_view(line).substr(0, tab), "token id", line_number);
    const std::uint64_t key = parse_u64(std::string_view(line).substr(tab + 1),
                                        "key index", line_number);
    if (token != i) {
      throw InputError("line " + std::to_string(line_number) +
                       ": token ids must be ascending from 0");
    }
    if (key >= key_count) {
      throw InputError("line " + std::to_string(line_number) +
                       ": key index out of range");
    }
    assignment[i] = static_cast<KeyIndex>(key);
  }
  VocabPartition partition(static_cast<std::uint32_t>(vocab_size),
                           static_cast<std::uint32_t>(key_count),
                           std::move(assignment));
  if (partition.digest() != digest) {
    throw InputError("partition digest mismatch: header says " + digest);
  }
  return partition;
}

VocabPartition read_partition_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_partition(in);
}

std::string format_token_line(const TokenSequence& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    if (tokens[i] == kGapToken) {
      out += "GAP";
    } else {
      out += std::to_string(tokens[i]);
    }
  }
  return out;
}

TokenSequence parse_token_line(const std::string& line,
                               std::size_t line_number) {
  TokenSequence tokens;
  std::istringstream ls(line);
  std::string field;
  while (ls >> field) {
    if (field == "GAP") {
      tokens.push_back(kGapToken);
      continue;
    }
    const std::uint64_t value = parse_u64(field, "token id", line_number);
    if (value >= kGapToken) {
      throw InputError("line " + std::to_string(line_number) +
                       ": token id too large");
    }
    tokens.push_back(static_cast<TokenId>(value));
  }
  return tokens;
}

void write_token_lines(std::ostream& out,
                       const std::vector<TokenSequence>& sequences) {
  for (const TokenSequence& tokens : sequences) {
    out << format_token_line(tokens) << "\n";
  }
}

void write_token_lines_file(const std::string& path,
                            const std::vector<TokenSequence>& sequences) {
  std::ofstream out = open_output(path);
  write_token_lines(out, sequences);
  if (!out) throw InputError("failed writing sequences to " + path);
}

std::vector<TokenSequence> read_token_lines(std::istream& in) {
  std::vector<TokenSequence> sequences;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    sequences.push_back(parse_token_line(line, line_number));
  }
  return sequences;
}

std::vector<TokenSequence> read_token_lines_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_token_lines(in);
}

std::map<std::string, std::string> read_kv_config(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const std::size_t end = line.find_last_not_of(" \t\r");
    const std::string trimmed = line.substr(begin, end - begin + 1);
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InputError("line " + std::to_string(line_number) +
                       ": expected key=value");
    }
    std::string key = trimmed.substr(0, eq);
    std::string value = trimmed.substr(eq + 1);
    const std::size_t key_end = key.find_last_not_of(" \t");
    key = key.substr(0, key_end + 1);
    const std::size_t value_begin = value.find_first_not_of(" \t");
    value = value_begin == std::string::npos ? "" : value.substr(value_begin);
    if (!entries.emplace(key, value).second) {
      throw InputError("line " + std::to_string(line_number) +
                       ": duplicate key '" + key + "'");
    }
  }
  return entries;
}

std::map<std::string, std::string> read_kv_config_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_kv_config(in);
}

}  // namespace patternmark
