from django.core.management.base import BaseCommand, CommandError

from forecasting.exceptions import WavecastError
from forecasting.experiment import ExperimentService, validate_experiment

EXIT_CONFIG_ERROR = 1
EXIT_PARTIAL_FAILURE = 2


class Command(BaseCommand):
    help = 'Run, validate or rank neighbors for a related-city forecasting experiment'

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='action', required=True)

        run = subparsers.add_parser('run', help='Train, evaluate and write every report file')
        self._common_arguments(run)
        run.add_argument('--seed', type=int, help='Master seed')
        run.add_argument('--jobs', type=int, help='Worker processes')
        run.add_argument(
            '--include-anomalous',
            action='store_true',
            default=None,
            help='Also summarize the stratum that keeps anomalous cities',
        )
        run.add_argument('--out', type=str, help='Output directory')
        run.add_argument(
            '--no-forecasts',
            dest='write_forecasts',
            action='store_false',
            default=None,
            help='Skip forecasts.csv',
        )
        run.add_argument('--excel', action='store_true', default=None, help='Also write summary.xlsx')
        run.add_argument('--dump-models', type=str, help='Directory for JSON dumps of the selected models')
        run.add_argument('--record', action='store_true', help='Track the run as an ExperimentRun row')

        validate = subparsers.add_parser('validate', help='Check inputs and configuration without training')
        self._common_arguments(validate)

        neighbors = subparsers.add_parser('neighbors', help='Write neighbors.csv only')
        self._common_arguments(neighbors)
        neighbors.add_argument('--out', type=str, help='Output directory')

    def _common_arguments(self, parser):
        parser.add_argument('--config', type=str, required=True, help='Experiment TOML file')
        parser.add_argument('--disease', type=str, help='Disease table to use from the config')
        parser.add_argument(
            '--criterion',
            action='append',
            help='none, geo, gdp or cases; repeat for several',
        )
        parser.add_argument(
            '--neighbors',
            action='append',
            type=int,
            help='Number of related cities (1-3); repeat for several',
        )

    def handle(self, *args, **options):
        action = options['action']
        try:
            if action == 'validate':
                self.validate(options)
            elif action == 'neighbors':
                self.neighbors(options)
            else:
                self.run(options)
        except WavecastError as e:
            raise CommandError(str(e), returncode=EXIT_CONFIG_ERROR) from e

    def _overrides(self, options):
        return {
            'criteria': options.get('criterion'),
            'k_values': options.get('neighbors'),
            'seed': options.get('seed'),
            'jobs': options.get('jobs'),
            'include_anomalous': options.get('include_anomalous'),
            'output_dir': options.get('out'),
            'write_forecasts': options.get('write_forecasts'),
            'excel': options.get('excel'),
            'dump_models_dir': options.get('dump_models'),
        }

    def validate(self, options):
        diagnostics = validate_experiment(options['config'], disease=options.get('disease'), **self._overrides(options))
        if diagnostics:
            for diagnostic in diagnostics:
                self.stdout.write(self.style.ERROR(f'  - {diagnostic}'))
            raise CommandError(f'{len(diagnostics)} problem(s) found', returncode=EXIT_CONFIG_ERROR)
        self.stdout.write(self.style.SUCCESS('Configuration is valid'))

    def neighbors(self, options):
        service = ExperimentService.from_file(options['config'], disease=options.get('disease'), **self._overrides(options))
        path = service.write_neighbors(service.config.criteria)
        self.stdout.write(self.style.SUCCESS(f'Wrote {path}'))

    def run(self, options):
        service = ExperimentService.from_file(options['config'], disease=options.get('disease'), **self._overrides(options))
        config = service.config
        self.stdout.write(
            f'Running {config.disease.disease} experiment (seed {config.seed}, {config.jobs} job(s))...'
        )

        if options.get('record'):
            outcome = service.run_recorded(options['config'])
            self.stdout.write(f'Recorded as run {outcome.run_id}')
        else:
            outcome = service.run()

        for name, path in outcome.files.items():
            self.stdout.write(f'  {name}: {path}')
        if outcome.best_algorithm:
            self.stdout.write(f'Best baseline algorithm: {outcome.best_algorithm}')

        if outcome.partial:
            for city, error in sorted(outcome.failed_cities.items()):
                self.stdout.write(self.style.WARNING(f'  {city}: {error}'))
            raise CommandError(
                f'{len(outcome.failed_cities)} of {outcome.n_cities} cities failed; '
                f'{len(outcome.reports)} reports written',
                returncode=EXIT_PARTIAL_FAILURE,
            )
        self.stdout.write(self.style.SUCCESS(
            f'Experiment completed: {len(outcome.reports)} reports for {outcome.n_cities} cities'
        ))
