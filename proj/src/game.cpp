#include "evoplat/game.hpp"

#include <algorithm>

#include "evoplat/errors.hpp"

namespace evoplat {

namespace {

// Solidity as collision: side edges act as walls, the sky above the level is
// open, and below the level there is nothing to stand on (pit).
bool solid_at(const LevelSpec& lv, int tx, int ty) {
  if (tx < 0 || tx >= lv.width) return true;
  if (ty < 0 || ty >= lv.height) return false;
  Tile t = lv.tile(tx, ty);
  return t == Tile::Ground || t == Tile::Pipe;
}

}  // namespace

bool on_ground(const GameState& s, const LevelSpec& lv) {
  if (s.y_pos % kSubTile != 0) return false;
  int tx = s.x_pos / kSubTile;
  int ty = s.y_pos / kSubTile;
  return solid_at(lv, tx, ty - 1);
}

GameState reset(const LevelSpec& lv) {
  GameState s;
  s.life = 3;
  s.time = lv.max_time;
  s.world = lv.world;
  s.stage = lv.stage;
  s.x_pos = lv.start_x * kSubTile;
  s.y_pos = lv.start_y * kSubTile;
  s.max_x_reached = s.x_pos;
  s.coin_taken.assign(static_cast<size_t>(lv.width) * lv.height, 0);
  return s;
}

StepEvents step(GameState& s, const LevelSpec& lv, Action action) {
  if (s.flag_get) throw EpisodeOver("step() after the flag was reached");
  if (s.life <= 0) throw EpisodeOver("step() with no lives left");

  StepEvents ev;
  const bool grounded = on_ground(s, lv);
  int tx = s.x_pos / kSubTile;
  int ty = s.y_pos / kSubTile;

  // Vertical intent. Jumping needs solid footing; there is no held-jump.
  if (has_jump(action) && grounded) {
    s.y_vel = kJumpImpulse;
  } else if (grounded) {
    s.y_vel = 0;
  } else {
    s.y_vel = std::max(s.y_vel - kGravity, -kTerminalFall);
  }

  // Horizontal move first, against the current row. Speeds are < 16, so at
  // most one tile boundary is crossed per axis per tick.
  int vx = horizontal_speed(action);
  if (vx != 0) {
    int nx = s.x_pos + vx;
    if (nx < 0 || nx > lv.width * kSubTile - 1) {
      ev.blocked = true;
      vx = 0;
    } else {
      int ntx = nx / kSubTile;
      if (ntx != tx && solid_at(lv, ntx, ty)) {
        ev.blocked = true;
        vx = 0;
      } else {
        s.x_pos = nx;
        tx = ntx;
      }
    }
  }
  s.x_vel = vx;

  // Vertical move: land on top of solids, bump under ceilings.
  bool fell_out = false;
  if (s.y_vel != 0) {
    int ny = s.y_pos + s.y_vel;
    if (s.y_vel < 0) {
      if (ny < 0) {
        fell_out = true;
        s.y_pos = 0;
      } else {
        int nty = ny / kSubTile;
        if (nty != ty && solid_at(lv, tx, nty)) {
          s.y_pos = (nty + 1) * kSubTile;
          s.y_vel = 0;
        } else {
          s.y_pos = ny;
        }
      }
    } else {
      int nty = ny / kSubTile;
      if (nty != ty && solid_at(lv, tx, nty)) {
        s.y_pos = ty * kSubTile + kSubTile - 1;
        s.y_vel = 0;
      } else {
        s.y_pos = ny;
      }
    }
    ty = s.y_pos / kSubTile;
  }

  // Cell effects at the final cell. The flag column wins over everything;
  // hazards kill; coins collect once per episode.
  if (fell_out) {
    ev.died = true;
  } else if (tx == lv.flag_x) {
    ev.reached_flag = true;
    s.flag_get = true;
  } else if (ty < lv.height) {
    Tile t = lv.tile(tx, ty);
    if (t == Tile::Hazard) {
      ev.died = true;
    } else if (t == Tile::Coin) {
      size_t idx = static_cast<size_t>(ty) * lv.width + tx;
      if (!s.coin_taken[idx]) {
        s.coin_taken[idx] = 1;
        s.coins += 1;
        s.score += 100;
        ev.coin_collected = true;
      }
    }
  }

  s.max_x_reached = std::max(s.max_x_reached, s.x_pos);

  // Clock: one unit per clock_divisor ticks, charged at the start of each
  // block so the very first tick of a life decrements the timer.
  s.ticks_this_life += 1;
  if ((s.ticks_this_life - 1) % lv.clock_divisor == 0) s.time -= 1;
  if (s.time <= 0 && !ev.reached_flag && !ev.died) ev.died = true;

  if (ev.died) {
    ev.died_time_left = std::max(s.time, 0);
    s.time = std::max(s.time, 0);
    s.life -= 1;
    if (s.life >= 1) {
      // Respawn keeps coins, score, and max_x_reached.
      s.x_pos = lv.start_x * kSubTile;
      s.y_pos = lv.start_y * kSubTile;
      s.x_vel = 0;
      s.y_vel = 0;
      s.time = lv.max_time;
      s.ticks_this_life = 0;
    }
  }
  return ev;
}

std::pair<GameState, StepEvents> step_copy(const GameState& state, const LevelSpec& lv,
                                           Action action) {
  GameState next = state;
  StepEvents ev = step(next, lv, action);
  return {std::move(next), ev};
}

void observe_into(const GameState& s, const LevelSpec& lv, const ObsConfig& cfg,
                  Observation& out) {
  const int W = cfg.width, H = cfg.height;
  out.resize(static_cast<size_t>(cfg.length()));
  int tx = s.x_pos / kSubTile;
  int ty = s.y_pos / kSubTile;
  size_t k = 0;
  // Top row first: dy from +H/2-1 down to -H/2, dx from -W/2 to +W/2-1.
  for (int dy = H / 2 - 1; dy >= -H / 2; --dy) {
    for (int dx = -W / 2; dx <= W / 2 - 1; ++dx) {
      int cx = tx + dx, cy = ty + dy;
      double code;
      if (!lv.in_bounds(cx, cy)) {
        code = static_cast<double>(Tile::Hazard);
      } else {
        Tile t = lv.tile(cx, cy);
        if (t == Tile::Coin &&
            s.coin_taken[static_cast<size_t>(cy) * lv.width + cx]) {
          t = Tile::Empty;
        }
        code = static_cast<double>(t);
      }
      out[k++] = code;
    }
  }
  out[k++] = static_cast<double>(s.x_vel);
  out[k++] = static_cast<double>(s.y_vel);
  out[k++] = static_cast<double>(s.time) / static_cast<double>(lv.max_time);
  out[k++] = on_ground(s, lv) ? 1.0 : 0.0;
}

Observation observe(const GameState& s, const LevelSpec& lv, const ObsConfig& cfg) {
  Observation out;
  observe_into(s, lv, cfg, out);
  return out;
}

}  // namespace evoplat
