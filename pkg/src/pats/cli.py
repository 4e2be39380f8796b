"""Command line interface: saliency maps, benchmark scoring, the selection
service, and grasp parameter estimation."""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import evaluation, images, pipeline, saliency, tree as tree_mod


def _cmd_map(args) -> int:
    img = images.load_rgb(args.image)
    res = pipeline.run(img, smooth=not args.no_smooth)
    out = args.output or (Path(args.image).stem + "_saliency.png")
    images.save_gray(saliency.render_map(res.sal_map), out)
    print(f"{args.image}: {res.region_count} regions, {res.tree.n_nodes} tree nodes -> {out}")
    if args.dump_tree:
        tree_mod.save_tree(res.tree, args.dump_tree)
        print(f"tree sidecar -> {args.dump_tree}")
    if args.dump_labels:
        images.save_rgb(images.label_colors(res.labels), args.dump_labels)
        print(f"label map -> {args.dump_labels}")
    return 0


def _cmd_eval(args) -> int:
    gt_dir = Path(args.gt)
    if args.images:
        src_dir = Path(args.images)
        pairs = []
        for name, img_path, gt_path in evaluation.pair_by_stem(src_dir, gt_dir):
            def loader(img_path=img_path, gt_path=gt_path):
                img = images.load_rgb(img_path)
                res = pipeline.run(img)
                sal = saliency.render_map(res.sal_map)
                gt = evaluation.binarize_gt(images.load_gray(gt_path))
                return sal, gt
            pairs.append((name, loader))
    else:
        pred_dir = Path(args.pred)
        pairs = []
        for name, pred_path, gt_path in evaluation.pair_by_stem(pred_dir, gt_dir):
            def loader(pred_path=pred_path, gt_path=gt_path):
                sal = images.load_gray(pred_path)
                gt = evaluation.binarize_gt(images.load_gray(gt_path))
                return sal, gt
            pairs.append((name, loader))
    if not pairs:
        print("no image/ground-truth pairs found", file=sys.stderr)
        return 2
    report = evaluation.evaluate_dataset(pairs, measure=args.measure, beta2=args.beta2)
    for im in report.images:
        flags = f" [{';'.join(im.flags)}]" if im.flags else ""
        print(f"{im.name}: t={im.threshold} score={im.score:.4f}{flags}")
    for name, reason in report.skipped:
        print(f"{name}: skipped ({reason})", file=sys.stderr)
    print(f"{args.measure} (beta2={args.beta2}) over {len(report.images)} images: "
          f"{report.mean_score:.4f}")
    if args.report:
        evaluation.write_csv(report, args.report)
        print(f"report -> {args.report}")
    return 1 if report.skipped else 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, default_static_dir

    static = args.static_dir or default_static_dir()
    app = create_app(ttl_seconds=args.session_ttl, static_dir=static)
    if static:
        print(f"serving operator UI from {static}")
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _cmd_grasp(args) -> int:
    from . import cloud as cloud_mod
    from . import grasp as grasp_mod

    mask = images.load_gray(args.mask) > 127
    cloud = cloud_mod.load_cloud(args.cloud)
    if cloud.points.shape[:2] != mask.shape:
        print("mask and cloud dimensions differ", file=sys.stderr)
        return 2
    x, y = (int(v) for v in args.click.split(","))
    gravity = np.array([float(v) for v in args.gravity.split(",")])
    try:
        spec = grasp_mod.build_grasp_spec(mask, (x, y), cloud, gravity)
    except grasp_mod.GraspError as exc:
        print(f"no grasp: {exc}", file=sys.stderr)
        return 1
    print(spec.to_json())
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pats", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_map = sub.add_parser("map", help="compute the saliency map of an image")
    p_map.add_argument("image")
    p_map.add_argument("-o", "--output", default=None, help="output PNG (default: <stem>_saliency.png)")
    p_map.add_argument("--dump-tree", default=None, help="write the partition tree sidecar")
    p_map.add_argument("--dump-labels", default=None, help="write the watershed label map as a random-color PNG")
    p_map.add_argument("--no-smooth", action="store_true", help="skip the 3x3 pre-blur")
    p_map.set_defaults(func=_cmd_map)

    p_eval = sub.add_parser("eval", help="score saliency maps against ground truth")
    src = p_eval.add_mutually_exclusive_group(required=True)
    src.add_argument("--pred", help="directory of precomputed 8-bit saliency maps")
    src.add_argument("--images", help="directory of input images (maps computed on the fly)")
    p_eval.add_argument("--gt", required=True, help="directory of binary ground-truth masks")
    p_eval.add_argument("--measure", choices=evaluation.MEASURES, default="fbeta")
    p_eval.add_argument("--beta2", type=float, default=evaluation.DEFAULT_BETA2)
    p_eval.add_argument("--report", default=None, help="write per-image CSV")
    p_eval.set_defaults(func=_cmd_eval)

    p_serve = sub.add_parser("serve", help="run the selection service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--session-ttl", type=float, default=30 * 60, help="idle session lifetime in seconds")
    p_serve.add_argument("--static-dir", default=None, help="directory of operator UI assets")
    p_serve.set_defaults(func=_cmd_serve)

    p_grasp = sub.add_parser("grasp", help="estimate grasp parameters from a mask, cloud, and click")
    p_grasp.add_argument("--mask", required=True, help="binary object mask PNG")
    p_grasp.add_argument("--cloud", required=True, help="ordered point cloud (.pcraw)")
    p_grasp.add_argument("--click", required=True, help="grasp click as x,y")
    p_grasp.add_argument("--gravity", default="0,0,-1", help="gravity direction as x,y,z")
    p_grasp.set_defaults(func=_cmd_grasp)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
