#pragma once

// 8-bit RGB images in binary PPM (P6) form.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "trackid/error.hpp"

namespace trackid {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, interleaved RGB

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

inline RgbImage read_ppm(std::istream& in) {
  auto token = [&]() {
    std::string t;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(c);
    }
    return t;
  };
  if (token() != "P6") throw Error("not a binary PPM (P6) image");
  RgbImage img;
  int maxval = 0;
  try {
    img.width = std::stoi(token());
    img.height = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw Error("malformed PPM header");
  }
  if (img.width < 0 || img.height < 0) throw Error("negative PPM dimensions");
  if (maxval != 255) throw Error("only 8-bit PPM images are supported");
  img.pixels.resize(img.pixel_count() * 3);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) throw Error("truncated PPM pixel data");
  return img;
}

inline RgbImage read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open image " + path);
  try {
    return read_ppm(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

inline void write_ppm(std::ostream& out, const RgbImage& img) {
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

}  // namespace trackid
