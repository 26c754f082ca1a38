from .settings import *

DEBUG = True

# Log chi tiết từng điểm lưới khi phát triển
LOGGING['loggers']['simulator']['level'] = 'DEBUG'
LOGGING['handlers']['console']['level'] = 'DEBUG'
