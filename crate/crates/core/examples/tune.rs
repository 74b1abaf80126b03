//! Scratch calibration runner: trains one estimation-sweep cell and prints
//! epoch losses plus saturation statistics. Not part of the library surface.

use rescnn_core::*;
use std::sync::Arc;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1024);
    let lr: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.005);
    let epochs: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(4);
    let seed: u64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(0);

    let dim = 2usize;
    let beta = 2.0f64;
    let target = by_name("sinsin", dim).unwrap();
    let oracle = TaylorOracle::new(Arc::clone(&target), beta).unwrap();
    let (m_budget, _) = rate_balance(beta / dim as f64, 1.0, n as u64).unwrap();
    println!("N={n} -> M={m_budget}");
    let (fnn, _) = holder_fnn(&oracle, m_budget as usize, dim).unwrap();
    let (template, _) = compile_fnn_to_cnn(&fnn, dim).unwrap();
    println!(
        "template: blocks={} max_depth={} channels={} n_in={} b_conv={} b_fc={}",
        template.num_blocks(),
        template.max_block_depth(),
        template.trunk_channels(),
        template.readout().n_in(),
        template.b_conv(),
        template.b_fc()
    );

    let clip = {
        let grid = cube_grid(dim, 41);
        grid.iter().map(|x| target.eval(x).abs()).fold(0.0, f64::max)
    };
    let data = gen_data(target.as_ref(), dim, n, 0.1, seed).unwrap();
    let init = random_init_like(
        &template,
        template.b_conv(),
        template.b_fc(),
        seed ^ 0x9E37_79B9_7F4A_7C15,
    )
    .unwrap();

    // Initial output stats on the training inputs.
    let stats = |net: &ResNetCnn| {
        let mut sat = 0usize;
        let mut maxabs = 0.0f64;
        let mut ms = 0.0f64;
        for x in data.inputs() {
            let y = cnn_eval(net, x).unwrap();
            if y.abs() > clip {
                sat += 1;
            }
            maxabs = maxabs.max(y.abs());
            ms += y * y / data.len() as f64;
        }
        (sat, maxabs, ms.sqrt())
    };
    let (sat0, max0, rms0) = stats(&init);
    println!("init: sat {sat0}/{} max|y| {max0:.3e} rms {rms0:.3e}", data.len());

    let param_delta = |a: &ResNetCnn, b: &ResNetCnn| {
        let mut dconv = 0.0f64;
        for (ba, bb) in a.blocks().iter().zip(b.blocks()) {
            for (la, lb) in ba.layers().iter().zip(bb.layers()) {
                for (wa, wb) in la.filter().taps().iter().zip(lb.filter().taps()) {
                    dconv = dconv.max((wa - wb).abs());
                }
                for (xa, xb) in la.bias().iter().zip(lb.bias()) {
                    dconv = dconv.max((xa - xb).abs());
                }
            }
        }
        let mut dro = 0.0f64;
        for (wa, wb) in a.readout().weight().iter().zip(b.readout().weight()) {
            dro = dro.max((wa - wb).abs());
        }
        let dbias = (a.readout().bias()[0] - b.readout().bias()[0]).abs();
        (dconv, dro, dbias)
    };

    let init0 = init.clone();
    let mut net = init;
    let mut total = 0usize;
    for e in 0..epochs {
        let tc = TrainConfig {
            steps: 8,
            learning_rate: lr,
            batch_size: 16,
            b_conv: template.b_conv(),
            b_fc: template.b_fc(),
            clip_level: clip,
            seed: (seed ^ 0xD1B5_4A32_D192_ED03).wrapping_add(e as u64),
            projection: ProjectionMode::PerStep,
        };
        let outcome = erm_train(&net, &data, &tc).unwrap();
        net = outcome.net;
        total += 8;
        let (sat, maxa, rms) = stats(&net);
        let (dc, dw, db) = param_delta(&init0, &net);
        let est = l2_error(
            |x| cnn_eval(&net, x).map(|y| clip_output(y, clip)),
            |x| Ok(target.eval(x)),
            dim,
            2000,
            0x5EED_CAFE_F00D_BEEF,
        )
        .unwrap();
        println!(
            "steps {total}: loss {:.4e} sat {sat}/{} max|y| {maxa:.3e} rms {rms:.3e} l2 {:.4e} dconv {dc:.3e} dro {dw:.3e} dbias {db:.3e}",
            outcome.epoch_losses.last().copied().unwrap_or(f64::NAN),
            data.len(),
            est.value
        );
    }
}
