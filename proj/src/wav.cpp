#include "hanr/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "hanr/error.hpp"

namespace hanr {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError(name + ": not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16 || len > avail) throw DataError(name + ": bad fmt chunk");
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == kFormatExtensible && len >= 40)
        format = le16(chunk + 8 + 24);  // first two bytes of the subformat GUID
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = std::min<std::size_t>(len, avail);
      if (len > avail) throw DataError(name + ": truncated data chunk");
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt) throw DataError(name + ": missing fmt chunk");
  if (data == nullptr) throw DataError(name + ": missing data chunk");
  if (channels != 1) throw ConfigError(name + ": only mono files are supported");

  WavData out;
  out.sample_rate = static_cast<int>(rate);
  if (format == kFormatPcm && bits == 16) {
    out.samples.resize(data_len / 2);
    for (std::size_t i = 0; i < out.samples.size(); ++i)
      out.samples[i] = static_cast<std::int16_t>(le16(data + 2 * i)) / 32768.0;
  } else if (format == kFormatFloat && bits == 32) {
    out.samples.resize(data_len / 4);
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
      const std::uint32_t u = le32(data + 4 * i);
      float f;
      std::memcpy(&f, &u, sizeof f);
      if (!std::isfinite(f)) throw DataError(name + ": non-finite sample");
      out.samples[i] = f;
    }
  } else {
    throw ConfigError(name + ": unsupported encoding (need 16-bit PCM or 32-bit float)");
  }
  return out;
}

Signal read_wav_checked(const std::filesystem::path& path, int sample_rate) {
  WavData w = read_wav(path);
  if (w.sample_rate != sample_rate)
    throw ConfigError(path.string() + ": sample rate " +
                      std::to_string(w.sample_rate) + " Hz, expected " +
                      std::to_string(sample_rate) + " Hz");
  return std::move(w.samples);
}

void write_wav(const std::filesystem::path& path, const Signal& samples,
               int sample_rate, WavEncoding encoding) {
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bytes_per_sample = pcm ? 2 : 4;
  const auto data_len = static_cast<std::uint32_t>(samples.size() * bytes_per_sample);

  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  put32(out, 36 + data_len);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, pcm ? kFormatPcm : kFormatFloat);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate) * bytes_per_sample);
  put16(out, bytes_per_sample);
  put16(out, static_cast<std::uint16_t>(8 * bytes_per_sample));
  out += "data";
  put32(out, data_len);
  for (double s : samples) {
    if (pcm) {
      const double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      const float f = static_cast<float>(s);
      std::uint32_t u;
      std::memcpy(&u, &f, sizeof u);
      put32(out, u);
    }
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace hanr
