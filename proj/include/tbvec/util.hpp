#ifndef TBVEC_UTIL_HPP
#define TBVEC_UTIL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tbvec {

// Decode UTF-8 into Unicode scalar values. Invalid bytes are kept as
// single-byte values so no input is ever rejected here.
std::vector<uint32_t> utf8_codepoints(const std::string& s);

// Split a decoded string back into per-codepoint UTF-8 chunks.
std::vector<std::string> utf8_chars(const std::string& s);

std::vector<std::string> split(const std::string& s, char sep);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

// Write `content` to a temporary name in the target directory and rename
// on success, so a failed run leaves no partial file behind.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Plain key-value manifest (one `key = value` per line, sorted by key).
std::string format_manifest(const std::map<std::string, std::string>& kv);

// Fixed decimal formatting used by every CSV writer so output bytes do not
// depend on locale or printf quirks.
std::string format_double(double v);

}  // namespace tbvec

#endif
