#!/usr/bin/env python3
"""
T2D medication CLI - generate cohorts, run experiments, train, predict and report.
"""
import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from t2dmed.config.pipeline_config import (
    MODEL_KINDS, GeneratorSettings, PipelineConfig, default_config_document, format_validation_error,
    load_pipeline_config,
)
from t2dmed.config.settings import get_config
from t2dmed.config.validator import ConfigValidator
from t2dmed.utils.errors import ConfigError, T2DMedError
from t2dmed.utils.logging_setup import configure_logging


def _load_config(path):
    return load_pipeline_config(path) if path else PipelineConfig()


def generate(args):
    """Write a synthetic cohort CSV."""
    from t2dmed.services.cohort_generator import cohort_generator, cohort_schema
    from t2dmed.services.tabular_service import tabular_service

    print(f"🚀 Generating {args.rows} patients (noise {args.noise}, seed {args.seed})...")
    try:
        settings = GeneratorSettings(n_rows=args.rows, noise_rate=args.noise,
                                     missing_rate=args.missing, seed=args.seed)
    except ValidationError as e:
        raise ConfigError(f"Invalid generator settings: {format_validation_error(e)}") from e
    table = cohort_generator.generate_cohort(settings)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    tabular_service.write_csv(table, args.out)
    print(f"✅ Wrote {table.n_rows} rows x {len(table.schema)} columns to {args.out}")
    if args.schema_out:
        tabular_service.save_schema(cohort_schema(), args.schema_out)
        print(f"✅ Wrote schema to {args.schema_out}")
    return 0


def run(args):
    """Run the full experiment."""
    from t2dmed.services.experiment_service import experiment_service

    config = _load_config(args.config)
    output_dir = args.out or config.output_dir or get_config().OUTPUT_DIR
    print(f"🚀 Running experiment ({len(config.model_kinds())} models, seed {config.master_seed})...")
    report = experiment_service.run_experiment(config, output_dir)

    print(f"\n{'model':<16}{'holdout':>10}{'train':>10}{'cv mean':>10}")
    for entry in report.ranking():
        cv = f"{entry.cv_mean:.4f}" if entry.cv_mean is not None else '-'
        print(f"{entry.kind:<16}{entry.accuracy:>10.4f}{entry.train_accuracy:>10.4f}{cv:>10}")
    for warning in report.metadata.get('warnings', []):
        print(f"⚠️  {warning}")
    print(f"\n✅ Best model: {report.best().kind}. Results written to {output_dir}")
    return 0


def train(args):
    """Train one model kind and save it."""
    from t2dmed.services.experiment_service import experiment_service
    from t2dmed.services.model_store import model_store

    config = _load_config(args.config)
    print(f"🚀 Training {args.model}...")
    model = experiment_service.train_model(config, args.model)
    model_store.save_model(model, args.out)
    print(f"✅ Saved {args.model} model to {args.out}")
    return 0


def predict(args):
    """Predict the medication for one patient."""
    from t2dmed.services.prediction_service import prediction_service

    result = prediction_service.predict_patient(args.model, row_csv=args.row, assignments=args.set)
    print(json.dumps(result.to_dict(), indent=2, sort_keys=True))
    return 0


def report(args):
    """Re-emit the CSV and figures of a finished run."""
    from t2dmed.services.report_writer import report_writer

    paths = report_writer.reemit(args.input_dir)
    for name, path in sorted(paths.items()):
        print(f"✅ {name}: {path}")
    return 0


def config_init(args):
    """Write the default configuration document."""
    text = json.dumps(default_config_document(), indent=2, sort_keys=True) + '\n'
    if not args.out:
        sys.stdout.write(text)
        return 0
    path = Path(args.out)
    if path.exists() and not args.force:
        print(f"❌ {path} already exists. Use --force to overwrite.")
        return 1
    path.write_text(text, encoding='utf-8')
    print(f"✅ Wrote default configuration to {path}")
    return 0


def config_validate(args):
    """Validate a configuration file."""
    print(f"🔍 Validating {args.config}...\n")
    result = ConfigValidator.validate_file(args.config)
    for error in result['errors']:
        print(f"❌ {error}")
    for warning in result['warnings']:
        print(f"⚠️  {warning}")
    if result['is_valid']:
        print(f"✅ Configuration valid. Models: {', '.join(result['model_kinds'])}")
        return 0
    print("\n❌ Configuration validation failed!")
    return 2


def check(args):
    """Run preflight checks."""
    from t2dmed.utils.preflight import PreflightManager

    config = _load_config(args.config)
    success = PreflightManager.run_preflight_checks(config, args.out, verbose=True)
    return 0 if success else 1


def build_parser():
    parser = argparse.ArgumentParser(
        description='T2D medication CLI - classifier comparison on tabular patient data',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python run_t2dmed.py generate --rows 9483 --noise 0.05 --seed 7 --out cohort.csv
  python run_t2dmed.py config init --out config.json
  python run_t2dmed.py run --config config.json --out results
  python run_t2dmed.py train --config config.json --model ann --out ann.json
  python run_t2dmed.py predict --model ann.json --set Fasting=180 --set BMI=31.5 ...
  python run_t2dmed.py report --in results
        """
    )
    parser.add_argument('--log-level', help='Logging level (overrides T2DMED_LOG_LEVEL)')
    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    gen_parser = subparsers.add_parser('generate', help='Generate a synthetic patient cohort CSV')
    gen_parser.add_argument('--rows', type=int, default=9483, help='Number of patients')
    gen_parser.add_argument('--noise', type=float, default=0.05, help='Label noise rate')
    gen_parser.add_argument('--missing', type=float, default=0.0, help='Fraction of numeric cells left blank')
    gen_parser.add_argument('--seed', type=int, default=0, help='Generator seed')
    gen_parser.add_argument('--out', required=True, help='Output CSV file')
    gen_parser.add_argument('--schema-out', help='Also write the cohort schema JSON here')
    gen_parser.set_defaults(func=generate)

    run_parser = subparsers.add_parser('run', help='Run the full experiment')
    run_parser.add_argument('--config', help='Pipeline configuration JSON (defaults when omitted)')
    run_parser.add_argument('--out', help='Output directory')
    run_parser.set_defaults(func=run)

    train_parser = subparsers.add_parser('train', help='Train and save one model')
    train_parser.add_argument('--config', help='Pipeline configuration JSON')
    train_parser.add_argument('--model', required=True, choices=MODEL_KINDS, help='Model kind')
    train_parser.add_argument('--out', required=True, help='Model file to write')
    train_parser.set_defaults(func=train)

    predict_parser = subparsers.add_parser('predict', help='Predict the medication for one patient')
    predict_parser.add_argument('--model', required=True, help='Saved model file')
    source = predict_parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--row', help='CSV file with a header and one patient row')
    source.add_argument('--set', action='append', metavar='FEATURE=VALUE', help='Feature value (repeatable)')
    predict_parser.set_defaults(func=predict)

    report_parser = subparsers.add_parser('report', help='Re-emit CSV and figures from a run directory')
    report_parser.add_argument('--in', dest='input_dir', required=True, help='Run output directory')
    report_parser.set_defaults(func=report)

    config_parser = subparsers.add_parser('config', help='Configuration file commands')
    config_sub = config_parser.add_subparsers(dest='config_command')
    init_parser = config_sub.add_parser('init', help='Write the default configuration')
    init_parser.add_argument('--out', help='File to write (stdout when omitted)')
    init_parser.add_argument('--force', action='store_true', help='Overwrite an existing file')
    init_parser.set_defaults(func=config_init)
    validate_parser = config_sub.add_parser('validate', help='Validate a configuration file')
    validate_parser.add_argument('--config', required=True, help='Configuration file')
    validate_parser.set_defaults(func=config_validate)

    check_parser = subparsers.add_parser('check', help='Run preflight checks')
    check_parser.add_argument('--config', help='Pipeline configuration JSON')
    check_parser.add_argument('--out', help='Output directory to check')
    check_parser.set_defaults(func=check)
    return parser


def main(argv=None):
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not getattr(args, 'func', None):
        parser.print_help()
        return 1

    configure_logging(args.log_level)
    try:
        return args.func(args)
    except T2DMedError as e:
        print(f"❌ {e}")
        return e.exit_code
    except KeyboardInterrupt:
        print("\n\n⚠️  Operation cancelled by user")
        return 1
    except Exception as e:
        print(f"\n❌ Unexpected error: {str(e)}")
        return 1


if __name__ == '__main__':
    sys.exit(main())
