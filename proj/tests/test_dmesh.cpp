#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>

#include "ipmm/triangulation.hpp"
#include "support.hpp"

using namespace ipmm;
using namespace ipmm_test;

TEST_CASE("build unit square with jitter") {
  std::vector<std::pair<Point2, VertexKind>> pts = {
      {{0, 0}, VertexKind::boundary},
      {{1, 0}, VertexKind::boundary},
      {{1 + 1e-9, 1}, VertexKind::boundary},
      {{0, 1}, VertexKind::boundary},
  };
  Triangulation t = Triangulation::build(pts);
  CHECK(t.real_cell_count() == 2);
  CHECK(t.vertex_count() == 4);
  CHECK(t.hull_vertex_count() == 4);
  CHECK(t.real_cell_count() == 2 * t.vertex_count() - t.hull_vertex_count() - 2);
  CHECK(t.validate_delaunay().empty());
}

TEST_CASE("build exactly cocircular square still works") {
  std::vector<std::pair<Point2, VertexKind>> pts = {
      {{0, 0}, VertexKind::boundary},
      {{1, 0}, VertexKind::boundary},
      {{1, 1}, VertexKind::boundary},
      {{0, 1}, VertexKind::boundary},
  };
  Triangulation t = Triangulation::build(pts);
  CHECK(t.real_cell_count() == 2);
  CHECK(t.validate_delaunay().empty());
  CHECK(brute_delaunay_offenders(t).empty());
  CHECK(t.total_area() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("build rejects degenerate input") {
  CHECK_THROWS_AS(Triangulation::build({{{0, 0}, VertexKind::bulk},
                                        {{1, 0}, VertexKind::bulk}}),
                  DegenerateInputError);
  CHECK_THROWS_AS(Triangulation::build({{{0, 0}, VertexKind::bulk},
                                        {{1, 1}, VertexKind::bulk},
                                        {{2, 2}, VertexKind::bulk},
                                        {{3, 3}, VertexKind::bulk}}),
                  DegenerateInputError);
  CHECK_THROWS_AS(Triangulation::build({{{0, 0}, VertexKind::bulk},
                                        {{1, 0}, VertexKind::bulk},
                                        {{0, 1}, VertexKind::bulk},
                                        {{0, 0}, VertexKind::bulk}}),
                  MeshError);
}

TEST_CASE("build random cloud is Delaunay with correct counts") {
  std::mt19937_64 rng(101);
  auto pts = random_cloud(rng, 200);
  Triangulation t = Triangulation::build(pts);
  CHECK(t.vertex_count() == 204);
  CHECK(t.validate_delaunay().empty());
  CHECK(brute_delaunay_offenders(t).empty());
  CHECK(t.real_cell_count() == 2 * t.vertex_count() - t.hull_vertex_count() - 2);
  CHECK(t.total_area() == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("build exact integer grid with collinear hull runs") {
  std::vector<std::pair<Point2, VertexKind>> pts;
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 7; ++x)
      pts.push_back({{double(x), double(y)}, VertexKind::bulk});
  Triangulation t = Triangulation::build(pts);
  CHECK(t.vertex_count() == 49);
  CHECK(t.hull_vertex_count() == 24);
  CHECK(t.validate_delaunay().empty());
  CHECK(brute_delaunay_offenders(t).empty());
  CHECK(t.total_area() == Catch::Approx(36.0).epsilon(1e-12));
  for (VertexId v : t.hull_vertices()) {
    Point2 p = t.position(v);
    bool on_frame = p.x == 0.0 || p.x == 6.0 || p.y == 0.0 || p.y == 6.0;
    CHECK(on_frame);
    CHECK(t.kind(v) == VertexKind::boundary);
  }
}

TEST_CASE("locate finds containing cells") {
  std::mt19937_64 rng(103);
  auto pts = random_cloud(rng, 150);
  Triangulation t = Triangulation::build(pts);

  for (CellId c : t.cell_ids()) {
    CellSnapshot s = t.snapshot(c);
    Point2 centroid = {(s.pos[0].x + s.pos[1].x + s.pos[2].x) / 3.0,
                       (s.pos[0].y + s.pos[1].y + s.pos[2].y) / 3.0};
    auto found = t.locate(centroid);
    REQUIRE(found.has_value());
    CHECK(*found == c);
  }

  CHECK_FALSE(t.locate({5.0, 5.0}).has_value());
  CHECK_FALSE(t.locate({-1.0, 0.5}).has_value());

  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 1000; ++i) {
    Point2 p{u(rng), u(rng)};
    auto found = t.locate(p);
    REQUIRE(found.has_value());
    CHECK(point_in_cell(t, *found, p));
  }
}

TEST_CASE("locate breaks on-edge ties toward the lower cell id") {
  std::mt19937_64 rng(107);
  auto pts = random_cloud(rng, 60);
  Triangulation t = Triangulation::build(pts);
  int tested = 0;
  for (CellId c : t.cell_ids()) {
    CellView cv = t.cell(c);
    for (int i = 0; i < 3 && tested < 50; ++i) {
      CellId nb = cv.neighbors[i];
      if (!nb.valid() || !t.cell_alive(nb) || t.cell_is_ghost(nb)) continue;
      CellSnapshot s = t.snapshot(c);
      Point2 a = s.pos[(i + 1) % 3], b = s.pos[(i + 2) % 3];
      Point2 mid = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
      if (orient2d(a, b, mid) != Orientation::zero) continue;  /* midpoint must
          stay exactly on the edge for the tie to exist */
      auto found = t.locate(mid);
      REQUIRE(found.has_value());
      CHECK(*found == std::min(c, nb));
      ++tested;
    }
  }
  CHECK(tested > 10);
}

TEST_CASE("locate at an existing vertex returns smallest star cell") {
  std::mt19937_64 rng(109);
  auto pts = random_cloud(rng, 40);
  Triangulation t = Triangulation::build(pts);
  int tested = 0;
  for (VertexId v : t.vertex_ids()) {
    if (t.kind(v) == VertexKind::boundary) continue;
    auto found = t.locate(t.position(v));
    REQUIRE(found.has_value());
    std::vector<CellId> star = t.incident_cells(v);
    CHECK(*found == *std::min_element(star.begin(), star.end()));
    if (++tested >= 20) break;
  }
  CHECK(tested > 0);
}

TEST_CASE("conflict_zone equals brute-force scan") {
  std::mt19937_64 rng(113);
  for (int mesh = 0; mesh < 30; ++mesh) {
    auto pts = random_cloud(rng, 40 + mesh);
    Triangulation t = Triangulation::build(pts);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int q = 0; q < 10; ++q) {
      Point2 p{u(rng), u(rng)};
      std::vector<CellId> got = t.conflict_zone(p);
      std::vector<CellId> want = brute_conflict_zone(t, p);
      REQUIRE(got == want);
    }
  }
}

TEST_CASE("conflict_zone includes cocircular boundary cells") {
  /* Two cells sharing a circumcircle: query on that circle hits both. */
  std::vector<std::pair<Point2, VertexKind>> pts = {
      {{0, 0}, VertexKind::boundary},
      {{1, 0}, VertexKind::boundary},
      {{1, 1}, VertexKind::boundary},
      {{0, 1}, VertexKind::boundary},
  };
  Triangulation t = Triangulation::build(pts);
  /* circumcircle of both cells is the unit-square circumcircle */
  Point2 on_circle{0.5 + std::sqrt(0.5), 0.5};
  std::vector<CellId> zone = brute_conflict_zone(t, on_circle);
  /* on_circle is outside the hull, so only test the scan semantics here */
  CHECK(zone.size() == 2);
  Point2 inside{0.5, 0.5};
  CHECK(t.conflict_zone(inside).size() == 2);
}

TEST_CASE("conflict_zone rejects outside points") {
  std::mt19937_64 rng(127);
  auto pts = random_cloud(rng, 30);
  Triangulation t = Triangulation::build(pts);
  CHECK_THROWS_AS(t.conflict_zone({7.0, -3.0}), MeshError);
}

TEST_CASE("insert centroid of a single triangle") {
  Triangulation t = Triangulation::build({{{0, 0}, VertexKind::boundary},
                                          {{1, 0}, VertexKind::boundary},
                                          {{0, 1}, VertexKind::boundary}});
  auto res = t.insert({1.0 / 3, 1.0 / 3}, VertexKind::bulk);
  CHECK(res.destroyed.size() == 1);
  CHECK(res.created.size() == 3);
  CHECK(t.real_cell_count() == 3);
  CHECK(t.validate_delaunay().empty());
  CHECK(t.vertex_alive(res.vertex));
  CHECK(t.position(res.vertex).x == 1.0 / 3);
}

TEST_CASE("insert rejects bad points") {
  std::mt19937_64 rng(131);
  auto pts = random_cloud(rng, 20);
  Triangulation t = Triangulation::build(pts);
  CHECK_THROWS_AS(t.insert({2.0, 2.0}, VertexKind::bulk), MeshError);
  CHECK_THROWS_AS(t.insert(pts[7].first, VertexKind::bulk), MeshError);
  /* exactly on a hull edge */
  CHECK_THROWS_AS(t.insert({0.5, 0.0}, VertexKind::bulk), MeshError);
}

TEST_CASE("insert keeps area and Delaunay property over 500 points") {
  std::mt19937_64 rng(137);
  auto pts = random_cloud(rng, 10);
  Triangulation t = Triangulation::build(pts);
  double area0 = t.total_area();
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int i = 0; i < 500; ++i) {
    Point2 p{u(rng), u(rng)};
    auto res = t.insert(p, VertexKind::bulk);
    double created = 0.0, destroyed = 0.0;
    for (const CellSnapshot& s : res.created) created += s.area();
    for (const CellSnapshot& s : res.destroyed) destroyed += s.area();
    REQUIRE(created == Catch::Approx(destroyed).epsilon(1e-10));
    REQUIRE(t.validate_delaunay().empty());
    if (i % 100 == 0) REQUIRE(brute_delaunay_offenders(t).empty());
  }
  CHECK(t.total_area() == Catch::Approx(area0).epsilon(1e-10));
  CHECK(t.vertex_count() == 514);
  CHECK(brute_delaunay_offenders(t).empty());
}

TEST_CASE("remove interior vertex of a fan leaves hull Delaunay") {
  std::vector<std::pair<Point2, VertexKind>> outer = {
      {{0, 0}, VertexKind::boundary},
      {{2, 0}, VertexKind::boundary},
      {{2.1, 1.9}, VertexKind::boundary},
      {{-0.2, 2.0}, VertexKind::boundary},
  };
  auto with_center = outer;
  with_center.push_back({{0.9, 1.0}, VertexKind::bulk});
  Triangulation t = Triangulation::build(with_center);
  REQUIRE(t.real_cell_count() == 4);
  VertexId center;
  for (VertexId v : t.vertex_ids())
    if (t.kind(v) == VertexKind::bulk) center = v;
  auto res = t.remove(center);
  CHECK(res.destroyed.size() == 4);
  CHECK(res.created.size() == 2);
  CHECK(t.validate_delaunay().empty());
  CHECK_FALSE(t.vertex_alive(center));

  Triangulation fresh = Triangulation::build(outer);
  CHECK(cell_shape_set(t) == cell_shape_set(fresh));
}

TEST_CASE("remove then reinsert restores the identical complex") {
  std::mt19937_64 rng(139);
  auto pts = random_cloud(rng, 80);
  Triangulation t = Triangulation::build(pts);
  auto before = cell_shape_set(t);
  int done = 0;
  for (VertexId v : t.vertex_ids()) {
    if (t.kind(v) == VertexKind::boundary) continue;
    Point2 p = t.position(v);
    t.remove(v);
    REQUIRE(t.validate_delaunay().empty());
    t.insert(p, VertexKind::bulk);
    REQUIRE(t.validate_delaunay().empty());
    if (++done == 15) break;
  }
  CHECK(done == 15);
  CHECK(cell_shape_set(t) == before);
}

TEST_CASE("random insert and remove stress keeps validator green") {
  std::mt19937_64 rng(149);
  auto pts = random_cloud(rng, 60);
  Triangulation t = Triangulation::build(pts);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  std::vector<VertexId> removable;
  for (VertexId v : t.vertex_ids())
    if (t.kind(v) != VertexKind::boundary) removable.push_back(v);
  for (int op = 0; op < 400; ++op) {
    bool do_insert = removable.size() < 20 || (rng() % 2 == 0);
    if (do_insert) {
      auto res = t.insert({u(rng), u(rng)}, VertexKind::bulk);
      removable.push_back(res.vertex);
    } else {
      std::size_t k = rng() % removable.size();
      t.remove(removable[k]);
      removable.erase(removable.begin() + k);
    }
    REQUIRE(t.validate_delaunay().empty());
    if (op % 50 == 0) REQUIRE(brute_delaunay_offenders(t).empty());
  }
  CHECK(brute_delaunay_offenders(t).empty());
}

TEST_CASE("boundary vertices cannot be removed or moved") {
  std::mt19937_64 rng(151);
  auto pts = random_cloud(rng, 10);
  Triangulation t = Triangulation::build(pts);
  for (VertexId v : t.vertex_ids()) {
    if (t.kind(v) != VertexKind::boundary) continue;
    CHECK_THROWS_AS(t.remove(v), MeshError);
    CHECK_THROWS_AS(t.move_vertex(v, {0.5, 0.5}), MeshError);
    break;
  }
}

TEST_CASE("stale ids are rejected") {
  std::mt19937_64 rng(157);
  auto pts = random_cloud(rng, 10);
  Triangulation t = Triangulation::build(pts);
  VertexId victim;
  for (VertexId v : t.vertex_ids())
    if (t.kind(v) == VertexKind::bulk) victim = v;
  std::vector<CellId> star = t.incident_cells(victim);
  t.remove(victim);
  CHECK_THROWS_AS(t.position(victim), MeshError);
  CHECK_THROWS_AS(t.remove(victim), MeshError);
  for (CellId c : star) CHECK_THROWS_AS(t.cell(c), MeshError);

  auto res = t.insert({0.456, 0.543}, VertexKind::bulk);
  CHECK(res.vertex != victim);  /* freed slot comes back with a fresh gen */
}

TEST_CASE("move_vertex keeps the id and the Delaunay property") {
  std::mt19937_64 rng(163);
  auto pts = random_cloud(rng, 50);
  Triangulation t = Triangulation::build(pts);
  VertexId v;
  for (VertexId w : t.vertex_ids())
    if (t.kind(w) == VertexKind::bulk) v = w;
  Point2 before = t.position(v);

  auto noop = t.move_vertex(v, before);
  CHECK_FALSE(noop.moved);

  Point2 target = {before.x + 0.001, before.y - 0.0015};
  auto res = t.move_vertex(v, target);
  CHECK(res.moved);
  CHECK(t.vertex_alive(v));
  CHECK(t.position(v).x == target.x);
  CHECK(t.position(v).y == target.y);
  CHECK(t.validate_delaunay().empty());
  CHECK(brute_delaunay_offenders(t).empty());
  CHECK_FALSE(res.hole_destroyed.empty());
  CHECK_FALSE(res.insert_created.empty());

  /* long random walk of one vertex through the mesh */
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  for (int i = 0; i < 200; ++i) {
    Point2 cur = t.position(v);
    Point2 next = {std::clamp(cur.x + u(rng), 0.1, 0.9),
                   std::clamp(cur.y + u(rng), 0.1, 0.9)};
    t.move_vertex(v, next);
    REQUIRE(t.validate_delaunay().empty());
  }
  CHECK(brute_delaunay_offenders(t).empty());
}

TEST_CASE("move_vertex failure leaves the mesh untouched") {
  std::mt19937_64 rng(167);
  auto pts = random_cloud(rng, 30);
  Triangulation t = Triangulation::build(pts);
  auto before = cell_shape_set(t);
  VertexId v;
  for (VertexId w : t.vertex_ids())
    if (t.kind(w) == VertexKind::bulk) v = w;
  CHECK_THROWS_AS(t.move_vertex(v, {3.0, 3.0}), MeshError);
  CHECK_THROWS_AS(t.move_vertex(v, pts[6].first), MeshError);
  CHECK(cell_shape_set(t) == before);
  CHECK(t.validate_delaunay().empty());
}

TEST_CASE("flipped diagonal is reported for exactly the two cells") {
  std::vector<std::pair<Point2, VertexKind>> pts = {
      {{0, 0}, VertexKind::boundary},
      {{2, 0}, VertexKind::boundary},
      {{2.1, 1.7}, VertexKind::boundary},
      {{-0.3, 1.5}, VertexKind::boundary},
  };
  Triangulation t = Triangulation::build(pts);
  REQUIRE(t.real_cell_count() == 2);
  REQUIRE(t.validate_delaunay().empty());

  std::vector<CellId> cells = t.cell_ids();
  CellView cv = t.cell(cells[0]);
  int shared = -1;
  for (int i = 0; i < 3; ++i)
    if (cv.neighbors[i].valid() && t.cell_alive(cv.neighbors[i]) &&
        !t.cell_is_ghost(cv.neighbors[i]))
      shared = i;
  REQUIRE(shared >= 0);
  t.flip_edge(cells[0], shared);

  std::vector<Violation> viols = t.validate_delaunay();
  std::set<uint64_t> offenders;
  for (const Violation& v : viols) {
    REQUIRE(v.cell.valid());
    CHECK(v.message == "neighbor apex inside circumcircle");
    offenders.insert(v.cell.key());
  }
  CHECK(offenders.size() == 2);
  CHECK(brute_delaunay_offenders(t).size() == 2);
}

TEST_CASE("incident cells and vertex neighbors are consistent") {
  std::mt19937_64 rng(173);
  auto pts = random_cloud(rng, 60);
  Triangulation t = Triangulation::build(pts);
  for (VertexId v : t.vertex_ids()) {
    if (t.kind(v) == VertexKind::boundary) continue;
    std::vector<CellId> star = t.incident_cells(v);
    std::vector<VertexId> link = t.vertex_neighbors(v);
    CHECK(star.size() == link.size());
    for (CellId c : star) {
      CellView cv = t.cell(c);
      bool has = cv.vertices[0] == v || cv.vertices[1] == v || cv.vertices[2] == v;
      CHECK(has);
    }
    /* link must be a closed cycle of mesh edges around v */
    for (std::size_t i = 0; i < link.size(); ++i) {
      Point2 a = t.position(link[i]);
      Point2 b = t.position(link[(i + 1) % link.size()]);
      Point2 p = t.position(v);
      CHECK(orient2d(a, b, p) == Orientation::positive);
    }
  }
}

TEST_CASE("cell data round-trips and survives only until retriangulation") {
  Triangulation t = Triangulation::build({{{0, 0}, VertexKind::boundary},
                                          {{1, 0}, VertexKind::boundary},
                                          {{0, 1}, VertexKind::boundary}},
                                         2);
  CellId c = t.cell_ids()[0];
  DataVector d(2);
  d[0] = 3.25;
  d[1] = -1.5;
  t.set_cell_data(c, d);
  CHECK(t.cell_data(c)[0] == 3.25);
  t.set_cell_label(c, PhaseLabel::inside);
  CHECK(t.cell_label(c) == PhaseLabel::inside);

  auto res = t.insert({0.25, 0.25}, VertexKind::bulk);
  for (const CellSnapshot& s : res.created) {
    CHECK(t.cell_data(s.id)[0] == 0.0);  /* fresh cells start zeroed */
    CHECK(t.cell_label(s.id) == PhaseLabel::unset);
  }
}
