import json
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from simulator.config import SCENARIOS, emit_config, parse_config
from simulator.exceptions import ConfigError, SimulationError
from simulator.runner import run


class Command(BaseCommand):
    help = 'Run a THz link simulation scenario and write its CSV output'

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='scenario', required=True)
        for name in SCENARIOS + ('validate-config',):
            sub = subparsers.add_parser(name, help=f'{name} scenario' if name in SCENARIOS else 'check a config file')
            sub.add_argument('--config', type=str, help='Path to a JSON simulation config')
            sub.add_argument('--out', type=str, help='Output directory (overrides the config)')
            sub.add_argument('--seed', type=int, help='Run seed (overrides the config)')
            sub.add_argument(
                '--set',
                action='append',
                default=[],
                dest='overrides',
                metavar='K=V',
                help='Override a config value, e.g. --set atmosphere.relative_humidity=80',
            )
            sub.add_argument('--queue', action='store_true', help='Enqueue on Celery instead of running inline')

    def handle(self, *args, **options):
        scenario = options['scenario']
        text = self.read_config(options['config'])
        overrides = list(options['overrides'])
        if options['seed'] is not None:
            overrides.append(f'seed={options["seed"]}')
        if options['out']:
            overrides.append(f'output={json.dumps(options["out"])}')

        if scenario == 'validate-config':
            config = self.parse(text, overrides, None)
            self.stdout.write(emit_config(config), ending='')
            self.stdout.write(self.style.SUCCESS(f'Config OK: scenario {config.scenario}, seed {config.seed}'))
            return

        config = self.parse(text, overrides, scenario)
        if options['queue']:
            from simulator.tasks import run_simulation
            task = run_simulation.delay(text, overrides, scenario)
            self.stdout.write(self.style.SUCCESS(f'Queued {scenario} as task {task.id}'))
            return

        try:
            result = run(config)
        except SimulationError as e:
            raise CommandError(str(e), returncode=e.exit_code)
        self.stdout.write(self.style.SUCCESS(result.summary))

    def read_config(self, path):
        if not path:
            return ''
        try:
            return Path(path).read_text(encoding='utf-8')
        except FileNotFoundError:
            raise CommandError(f'Config file {path} not found', returncode=2)
        except UnicodeDecodeError as e:
            raise CommandError(f'Config file {path} is not valid UTF-8: {e}', returncode=2)

    def parse(self, text, overrides, scenario):
        try:
            return parse_config(text, overrides, scenario=scenario)
        except ConfigError as e:
            raise CommandError(f'Invalid config: {e}', returncode=e.exit_code)
