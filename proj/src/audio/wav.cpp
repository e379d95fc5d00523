// SPDX-License-Identifier: Apache-2.0
#include "acad/audio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace acad::audio {

bool LoudnessLufs::is_silent() const noexcept { return std::isinf(value) && value < 0; }

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}
void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::string info_chunk(std::string_view comment) {
  if (comment.empty()) return {};
  std::string text(comment);
  text.push_back('\0');
  if (text.size() % 2) text.push_back('\0');
  std::string c = "LIST";
  put32(c, static_cast<std::uint32_t>(4 + 8 + text.size()));
  c += "INFO";
  c += "ICMT";
  put32(c, static_cast<std::uint32_t>(text.size()));
  c += text;
  return c;
}

std::string make_header(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                        std::uint16_t bits, std::uint32_t data_bytes, const std::string& extra = {}) {
  std::string h;
  h += "RIFF";
  put32(h, static_cast<std::uint32_t>(36 + extra.size()) + data_bytes);
  h += "WAVE";
  h += "fmt ";
  put32(h, 16);
  put16(h, format);
  put16(h, channels);
  put32(h, rate);
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  put32(h, rate * block_align);
  put16(h, block_align);
  put16(h, bits);
  h += extra;
  h += "data";
  put32(h, data_bytes);
  return h;
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  if (path.empty()) fail(ErrorCode::IoFailure, "empty output path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoFailure, "write failed for '" + path.string() + "'");
}

}  // namespace

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  const std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
  const std::size_t n = raw.size();

  if (n < 12 || std::memcmp(bytes, "RIFF", 4) != 0 || std::memcmp(bytes + 8, "WAVE", 4) != 0)
    fail(ErrorCode::MalformedContainer, "'" + path.string() + "' is not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const unsigned char* chunk = bytes + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > n) {
      // Tolerate a truncated trailing data chunk, a common writer bug.
      if (std::memcmp(chunk, "data", 4) == 0) {
        data = bytes + body;
        data_size = n - body;
        break;
      }
      fail(ErrorCode::MalformedContainer, "chunk overruns file in '" + path.string() + "'");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) fail(ErrorCode::MalformedContainer, "fmt chunk too small");
      format = le16(bytes + body);
      channels = le16(bytes + body + 2);
      rate = le32(bytes + body + 4);
      bits = le16(bytes + body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) fail(ErrorCode::MalformedContainer, "extensible fmt chunk too small");
        format = le16(bytes + body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes + body;
      data_size = size;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt || data == nullptr)
    fail(ErrorCode::MalformedContainer, "missing fmt or data chunk in '" + path.string() + "'");
  if (channels == 0 || rate == 0) fail(ErrorCode::MalformedContainer, "zero channels or rate");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32)
    fail(ErrorCode::UnsupportedEncoding, "format " + std::to_string(format) + " with " +
                                             std::to_string(bits) + " bits");

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frames = data_size / (bytes_per_sample * channels);
  if (frames == 0) fail(ErrorCode::MalformedContainer, "no audio frames in '" + path.string() + "'");

  std::vector<double> mono(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (f * channels + c) * bytes_per_sample;
      if (pcm16) {
        const auto s = static_cast<std::int16_t>(le16(p));
        acc += static_cast<double>(s) / 32768.0;
      } else {
        const std::uint32_t u = le32(p);
        float v;
        std::memcpy(&v, &u, sizeof v);
        acc += static_cast<double>(v);
      }
    }
    mono[f] = acc / channels;
  }
  return AudioClip(std::move(mono), static_cast<int>(rate));
}

std::string read_wav_comment(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  const std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
  const std::size_t n = raw.size();
  if (n < 12 || std::memcmp(bytes, "RIFF", 4) != 0) return {};
  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const std::uint32_t size = le32(bytes + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > n) break;
    if (std::memcmp(bytes + pos, "LIST", 4) == 0 && size >= 12 &&
        std::memcmp(bytes + body, "INFO", 4) == 0 && std::memcmp(bytes + body + 4, "ICMT", 4) == 0) {
      const std::uint32_t len = le32(bytes + body + 8);
      std::string text(raw.data() + body + 12, std::min<std::size_t>(len, size - 12));
      return text.substr(0, text.find('\0'));
    }
    pos = body + size + (size & 1u);
  }
  return {};
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path, std::string_view comment) {
  const auto& s = clip.samples();
  const auto data_bytes = static_cast<std::uint32_t>(s.size() * 4);
  std::string out = make_header(kFormatFloat, 1, static_cast<std::uint32_t>(clip.sample_rate()), 32,
                                data_bytes, info_chunk(comment));
  out.reserve(out.size() + data_bytes);
  for (double x : s) {
    const auto v = static_cast<float>(x);
    std::uint32_t u;
    std::memcpy(&u, &v, sizeof u);
    put32(out, u);
  }
  write_bytes(path, out);
}

void write_wav_pcm16(const std::vector<std::vector<double>>& channels, int sample_rate,
                     const std::filesystem::path& path) {
  require(!channels.empty() && !channels.front().empty(), ErrorCode::InvalidArgument,
          "no channels to write");
  const std::size_t frames = channels.front().size();
  for (const auto& ch : channels)
    require(ch.size() == frames, ErrorCode::InvalidArgument, "channel lengths differ");
  const auto nch = static_cast<std::uint16_t>(channels.size());
  const auto data_bytes = static_cast<std::uint32_t>(frames * nch * 2);
  std::string out =
      make_header(kFormatPcm, nch, static_cast<std::uint32_t>(sample_rate), 16, data_bytes);
  for (std::size_t f = 0; f < frames; ++f) {
    for (const auto& ch : channels) {
      const double scaled = std::round(ch[f] * 32768.0);
      const double clamped = std::clamp(scaled, -32768.0, 32767.0);
      put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(clamped)));
    }
  }
  write_bytes(path, out);
}

}  // namespace acad::audio
