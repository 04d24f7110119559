use crlab_core::dynamics::diagnostics;
use crlab_core::operator::ZeroOperator;
use crlab_core::init::random_smooth;
use crlab_core::io::*;
use crlab_core::*;
use proptest::prelude::*;
use std::path::Path;

#[test]
fn golden_snapshot_decodes() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden_d2_n4.crf");
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len(), HEADER_LEN + 16 * 16);
    let (f, t) = read_snapshot(&path).unwrap();
    assert_eq!(t, 0.125);
    assert_eq!(f.side(), Side::Frequency);
    assert_eq!(*f.grid(), GridSpec::new(2, 4, 2.0).unwrap());
    for (k, v) in f.values().iter().enumerate() {
        assert_eq!(*v, Complex64::new(k as f64 + 0.25, -(k as f64) / 8.0));
    }
    assert_eq!(encode_snapshot(&f, t), bytes);
}

#[test]
fn snapshot_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::new(3, 8, 3.0).unwrap();
    let f = random_smooth(grid, 1.0, 4, false);
    let path = dir.path().join("f.crf");
    write_snapshot(&f, 0.75, &path).unwrap();
    let (g, t) = read_snapshot(&path).unwrap();
    assert_eq!((g, t), (f, 0.75));
    assert!(matches!(read_snapshot(&dir.path().join("missing.crf")), Err(Error::Io(_))));
}

#[test]
fn csv_layout() {
    assert_eq!(
        diagnostics_header(3).split(',').count(),
        diagnostics_header(2).split(',').count() + 6
    );
    assert_eq!(format_number(0.1), "1.0000000000000001e-1");
    assert_eq!(format_number(-2.0), "-2.0000000000000000e0");
    let grid = GridSpec::new(2, 8, 2.0).unwrap();
    let g = random_smooth(grid, 1.0, 2, false);
    let rec = diagnostics(&g, 0.0, &ZeroOperator::new(grid)).unwrap();
    let text = diagnostics_csv(&[rec.clone(), rec], 2);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], diagnostics_header(2));
    assert_eq!(lines[1], lines[2]);
    let cols = lines[0].split(',').count();
    assert!(lines[1..].iter().all(|l| l.split(',').count() == cols));
}

#[test]
fn config_render_round_trips() {
    let text = "dimension = 3\ngrid_n = 16\ngrid_half_width = 6\n# comment\nseed = 7\ninit = random\nsymmetry = rotate 2 1 3; scale -1\nnorm_p = inf\n";
    let cfg = RunConfig::parse(text).unwrap();
    let again = RunConfig::parse(&cfg.render()).unwrap();
    assert_eq!(again.render(), cfg.render());
    assert_eq!(again.symmetries().unwrap().len(), 2);
    assert!(again.norm_p.is_some_and(f64::is_infinite));
    assert!(RunConfig::parse("dimension = 2\ndimension = 3\n").is_err());
    assert!(RunConfig::parse("colour = blue\n").is_err());
    let e = parse_config("", Subcommand::Evolve).unwrap_err();
    assert!(e.to_string().contains("dimension"), "{e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn snapshot_round_trip_is_bitwise(
        d in 2usize..=3,
        n in prop::sample::select(vec![4usize, 6, 8]),
        l in 0.5f64..20.0,
        t in -5.0f64..5.0,
        physical in any::<bool>(),
        raw in prop::collection::vec(any::<u64>(), 1024),
    ) {
        let grid = GridSpec::new(d, n, l).unwrap();
        let vals: Vec<Complex64> = (0..grid.len())
            .map(|k| Complex64::new(f64::from_bits(raw[2 * k % 1024]), f64::from_bits(raw[(2 * k + 1) % 1024])))
            .collect();
        let side = if physical { Side::Physical } else { Side::Frequency };
        let f = Field::from_values(grid, side, vals).unwrap();
        let bytes = encode_snapshot(&f, t);
        prop_assert_eq!(bytes.len(), HEADER_LEN + 16 * grid.len());
        prop_assert_eq!(&bytes[..4], MAGIC);
        let (g, t2) = decode_snapshot(&bytes).unwrap();
        prop_assert_eq!(t2.to_bits(), t.to_bits());
        prop_assert_eq!(g.grid(), f.grid());
        prop_assert_eq!(g.side(), f.side());
        for (a, b) in g.values().iter().zip(f.values()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        prop_assert_eq!(encode_snapshot(&g, t2), bytes);
    }
}
