// scratch probe: block symmetry scaling across levels
use elastoscat::bie::{assemble, OperatorTag};
use elastoscat::medium::ElasticMedium;
use elastoscat::surface::{build_grid, StarSurface};
use elastoscat::CMat3;

fn main() {
    let m = ElasticMedium::new(2.0, 1.0, 1.0, 2.0).unwrap();
    for level in [1u32, 2, 3] {
        let grid = build_grid(&StarSurface::unit_sphere(), level).unwrap();
        let s = assemble(&grid, &m, OperatorTag::S).unwrap();
        let n = grid.n_nodes();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                if (grid.nodes[i] - grid.nodes[j]).norm() < 1.2 { continue; }
                let mut block = CMat3::zeros();
                let mut scale = 0.0f64;
                for r in 0..3 {
                    for c in 0..3 {
                        let a = s.matrix[(3 * i + r, 3 * j + c)] / grid.weights[j];
                        let b = s.matrix[(3 * j + c, 3 * i + r)] / grid.weights[i];
                        block[(r, c)] = a - b;
                        scale = scale.max(a.norm());
                    }
                }
                worst = worst.max(block.norm() / scale);
            }
        }
        println!("level {level}: worst normalized asymmetry (dist>1.2) = {worst:.4e}");
    }
}
