// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/audio.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "wsep/common.hpp"

namespace wsep {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t rd_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
void wr_u32(std::ofstream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<char*>(b), 4);
}
void wr_u16(std::ofstream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  os.write(reinterpret_cast<char*>(b), 2);
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  WSEP_CHECK(is.good(), "cannot open WAV file: " << path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  WSEP_CHECK(bytes.size() >= 44 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
                 std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
             "not a RIFF/WAVE file: " << path);

  AudioClip clip;
  bool have_fmt = false;
  int channels = 0, bits = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    std::uint32_t sz = rd_u32(hdr + 4);
    const unsigned char* body = hdr + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0 && sz >= 16) {
      std::uint16_t fmt = rd_u16(body);
      channels = rd_u16(body + 2);
      clip.sample_rate = static_cast<int>(rd_u32(body + 4));
      bits = rd_u16(body + 14);
      WSEP_CHECK(fmt == 1, "only PCM WAV is supported: " << path);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      WSEP_CHECK(have_fmt, "WAV data chunk before fmt: " << path);
      WSEP_CHECK(channels == 1 && bits == 16,
                 "expected 16-bit mono WAV, got " << channels << "ch/" << bits
                                                  << "bit: " << path);
      std::size_t count = sz / 2;
      WSEP_CHECK(pos + 8 + sz <= bytes.size(), "truncated WAV: " << path);
      clip.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        std::int16_t s = static_cast<std::int16_t>(
            body[2 * i] | (body[2 * i + 1] << 8));
        clip.samples[i] = static_cast<double>(s) / 32768.0;
      }
      return clip;
    }
    pos += 8 + sz + (sz & 1);
  }
  throw Error("WAV file has no data chunk: " + path);
}

void write_wav(const std::string& path, const AudioClip& clip) {
  std::ofstream os(path, std::ios::binary);
  WSEP_CHECK(os.good(), "cannot write WAV file: " << path);
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(clip.samples.size() * 2);
  os.write("RIFF", 4);
  wr_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  wr_u32(os, 16);
  wr_u16(os, 1);  // PCM
  wr_u16(os, 1);  // mono
  wr_u32(os, static_cast<std::uint32_t>(clip.sample_rate));
  wr_u32(os, static_cast<std::uint32_t>(clip.sample_rate * 2));
  wr_u16(os, 2);
  wr_u16(os, 16);
  os.write("data", 4);
  wr_u32(os, data_bytes);
  for (double v : clip.samples) {
    double c = v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v);
    std::int16_t s = static_cast<std::int16_t>(std::lround(c * 32767.0));
    unsigned char b[2] = {static_cast<unsigned char>(s & 0xff),
                          static_cast<unsigned char>((s >> 8) & 0xff)};
    os.write(reinterpret_cast<char*>(b), 2);
  }
  WSEP_CHECK(os.good(), "I/O failure writing WAV: " << path);
}

}  // namespace wsep
