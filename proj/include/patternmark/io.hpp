#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "patternmark/partition.hpp"
#include "patternmark/types.hpp"

namespace patternmark {

// Partition file format (version 1):
//   patternmark-partition v1 N=<N> l=<l> digest=<hex>
//   <token_id>\t<key_index>
//   ... one line per token id, ascending ...
// The digest is checked on load; mismatch raises InputError.
void write_partition(std::ostream& out, const VocabPartition& partition);
void write_partition_file(const std::string& path,
                          const VocabPartition& partition);
VocabPartition read_partition(std::istream& in);
VocabPartition read_partition_file(const std::string& path);

// Sequence files hold one sequence per line: whitespace-separated decimal
// token ids, with "GAP" marking a masked or removed position. Blank lines
// are skipped. Parse errors carry 1-based line numbers.
std::string format_token_line(const TokenSequence& tokens);
TokenSequence parse_token_line(const std::string& line, std::size_t line_number);
void write_token_lines(std::ostream& out,
                       const std::vector<TokenSequence>& sequences);
void write_token_lines_file(const std::string& path,
                            const std::vector<TokenSequence>& sequences);
std::vector<TokenSequence> read_token_lines(std::istream& in);
std::vector<TokenSequence> read_token_lines_file(const std::string& path);

// Flat key=value config files: '#' comments, blank lines ignored,
// duplicate keys raise InputError with the offending line number.
std::map<std::string, std::string> read_kv_config(std::istream& in);
std::map<std::string, std::string> read_kv_config_file(const std::string& path);

}  // namespace patternmark
